// Command-line driver: runs seeded CSPDA sweeps, queries the exact LP
// oracle, and emits the queue benchmark model file.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cspda/cmdp_core.hpp"
#include "cspda/experiment.hpp"
#include "cspda/lp_oracle.hpp"
#include "cspda/model_io.hpp"

namespace {

void print_summary(const char* tag, const cspda::ExperimentResult& result) {
    const auto& table = result.aggregate;
    if (table.ts.empty()) {
        std::printf("[%s] no successful runs\n", tag);
        return;
    }
    int failures = 0;
    for (const auto& r : result.records)
        if (r.failed) ++failures;
    const std::size_t last = table.ts.size() - 1;
    auto col = [&](const std::string& name) {
        for (std::size_t c = 0; c < table.columns.size(); ++c)
            if (table.columns[c] == name) return table.mean[last][c];
        return 0.0;
    };
    std::printf("[%s] kappa=%.6g seeds=%zu (failed %d) T=%lld\n", tag, result.config.kappa,
                result.records.size(), failures,
                static_cast<long long>(result.config.iterations));
    std::printf("[%s]   final <lambda_bar, r>   = %.6f  (LP optimum %.6f)\n", tag, col("obj_avg"),
                result.oracle_objective);
    std::printf("[%s]   final J_r(pi_bar)       = %.6f\n", tag, col("J_r"));
    for (int i = 1; i <= result.model.num_constraints; ++i)
        std::printf("[%s]   final J_g%d(pi_bar)      = %.6f\n", tag, i,
                    col("J_g" + std::to_string(i)));
    std::printf("[%s]   final flow residual     = %.3e\n", tag, col("flow_res"));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conservative stochastic primal-dual solver for constrained MDPs"};
    app.require_subcommand(1);

    // --- run ---------------------------------------------------------------
    auto* run_cmd = app.add_subcommand("run", "Run a seeded experiment sweep from a spec file");
    std::string spec_path;
    run_cmd->add_option("spec", spec_path, "experiment spec (JSON)")->required();
    int opt_seeds = -1;
    long long opt_t = -1;
    long long opt_stride = -1;
    std::string opt_kappa_mode;
    std::string opt_out_dir;
    run_cmd->add_option("--seeds", opt_seeds, "override number of seeds");
    run_cmd->add_option("--T", opt_t, "override iteration count");
    run_cmd->add_option("--stride", opt_stride, "override logging stride");
    run_cmd->add_option("--kappa-mode", opt_kappa_mode, "auto | zero | explicit | both");
    run_cmd->add_option("--out-dir", opt_out_dir, "override output directory");

    // --- oracle ------------------------------------------------------------
    auto* oracle_cmd = app.add_subcommand("oracle", "Solve the occupancy-measure LP exactly");
    std::string model_path;
    double kappa = 0.0;
    std::string lambda_csv;
    oracle_cmd->add_option("model", model_path, "model file (JSON)")->required();
    oracle_cmd->add_option("--kappa", kappa, "conservative margin (default 0)");
    oracle_cmd->add_option("--csv", lambda_csv, "write the optimal occupancy measure as CSV");

    // --- queue-model ---------------------------------------------------------
    auto* queue_cmd = app.add_subcommand("queue-model", "Emit the queue benchmark model file");
    std::string out_path = "queue_model.json";
    cspda::QueueParams params;
    queue_cmd->add_option("--out", out_path, "output path (default queue_model.json)");
    queue_cmd->add_option("--buffer-size", params.buffer_size, "buffer size L (default 5)");
    queue_cmd->add_option("--gamma", params.gamma, "discount factor (default 0.5)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            cspda::ExperimentSpec spec = cspda::load_experiment_spec(spec_path);
            if (opt_seeds > 0) spec.num_seeds = opt_seeds;
            if (opt_t > 0) spec.iterations = opt_t;
            if (opt_stride > 0) spec.stride = opt_stride;
            if (!opt_out_dir.empty()) spec.out_dir = opt_out_dir;
            bool both = opt_kappa_mode == "both";
            if (!both && !opt_kappa_mode.empty()) {
                if (opt_kappa_mode == "auto")
                    spec.kappa_mode = cspda::KappaMode::auto_derived;
                else if (opt_kappa_mode == "zero")
                    spec.kappa_mode = cspda::KappaMode::zero;
                else if (opt_kappa_mode == "explicit")
                    spec.kappa_mode = cspda::KappaMode::explicit_value;
                else
                    throw std::invalid_argument("unknown --kappa-mode: " + opt_kappa_mode);
            }
            if (both) {
                const auto cmp = cspda::run_comparison(spec);
                print_summary("kappa>0", cmp.conservative);
                print_summary("kappa=0", cmp.plain);
                if (cmp.conservative.model.num_constraints > 0 &&
                    spec.env_kind == cspda::ExperimentSpec::EnvKind::queue) {
                    const auto& t = cmp.conservative.aggregate;
                    if (!t.ts.empty())
                        std::printf("[note] queue rewards are stored rescaled by 1/%g; "
                                    "raw objective = %g x reported\n",
                                    spec.queue.reward_scale, spec.queue.reward_scale);
                }
            } else {
                const auto result = cspda::run_experiment(spec);
                print_summary(cspda::to_string(spec.kappa_mode), result);
            }
            return 0;
        }

        if (*oracle_cmd) {
            const cspda::CmdpModel model = cspda::load_model(model_path);
            const auto sol = cspda::solve_cmdp_lp(model, kappa);
            std::printf("status: %s\n", cspda::to_string(sol.status));
            if (sol.status == cspda::LpStatus::optimal) {
                std::printf("objective: %.12f\n", sol.objective);
                for (std::size_t i = 0; i < sol.dual_u.size(); ++i)
                    std::printf("dual_u[%zu]: %.12f\n", i, sol.dual_u[i]);
                const auto kkt = cspda::kkt_report(model, kappa, sol);
                std::printf("kkt max residual: %.3e\n", kkt.max_residual());
                if (model.num_constraints > 0)
                    std::printf("slater margin: %.12f\n", cspda::slater_margin(model));
                if (!lambda_csv.empty()) {
                    std::ofstream out(lambda_csv, std::ios::binary);
                    out << "s,a,lambda\n";
                    for (int s = 0; s < model.num_states; ++s)
                        for (int a = 0; a < model.num_actions; ++a) {
                            char buf[64];
                            std::snprintf(buf, sizeof(buf), "%d,%d,%.17g\n", s, a,
                                          sol.lambda_star.at(s, a));
                            out << buf;
                        }
                }
            }
            return sol.status == cspda::LpStatus::optimal ? 0 : 2;
        }

        if (*queue_cmd) {
            const cspda::CmdpModel model = cspda::build_queue_cmdp(params);
            cspda::save_model(model, out_path);
            std::printf("wrote %s (|S|=%d, |A|=%d, I=%d, g_max=%g)\n", out_path.c_str(),
                        model.num_states, model.num_actions, model.num_constraints, model.g_max);
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
