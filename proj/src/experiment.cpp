#include "cspda/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "cspda/cmdp_core.hpp"
#include "cspda/model_io.hpp"
#include "cspda/svg_plot.hpp"

namespace cspda {

namespace {

using Json = nlohmann::ordered_json;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::vector<std::string> column_names(int num_constraints) {
    std::vector<std::string> cols = {"obj_avg"};
    for (int i = 1; i <= num_constraints; ++i) cols.push_back("g" + std::to_string(i));
    cols.push_back("flow_res");
    cols.push_back("J_r");
    for (int i = 1; i <= num_constraints; ++i) cols.push_back("J_g" + std::to_string(i));
    return cols;
}

std::vector<double> row_values(const RunRecord::Row& row) {
    std::vector<double> vals;
    vals.push_back(row.obj_avg);
    vals.insert(vals.end(), row.g_avg.begin(), row.g_avg.end());
    vals.push_back(row.flow_res);
    vals.push_back(row.j_r);
    vals.insert(vals.end(), row.j_g.begin(), row.j_g.end());
    return vals;
}

}  // namespace

const char* to_string(KappaMode mode) {
    switch (mode) {
        case KappaMode::auto_derived: return "auto";
        case KappaMode::zero: return "zero";
        case KappaMode::explicit_value: return "explicit";
    }
    return "?";
}

std::string experiment_spec_to_json(const ExperimentSpec& spec) {
    Json j;
    Json env;
    switch (spec.env_kind) {
        case ExperimentSpec::EnvKind::queue: {
            env["type"] = "queue";
            env["buffer_size"] = spec.queue.buffer_size;
            env["service_levels"] = spec.queue.service_levels;
            env["flow_levels"] = spec.queue.flow_levels;
            env["gamma"] = spec.queue.gamma;
            break;
        }
        case ExperimentSpec::EnvKind::random: {
            env["type"] = "random";
            env["num_states"] = spec.random.num_states;
            env["num_actions"] = spec.random.num_actions;
            env["num_constraints"] = spec.random.num_constraints;
            env["slater_margin_target"] = spec.random.slater_margin_target;
            env["gamma"] = spec.random.gamma;
            env["model_seed"] = spec.random.model_seed;
            break;
        }
        case ExperimentSpec::EnvKind::file: {
            env["type"] = "file";
            env["path"] = spec.model_file;
            break;
        }
    }
    j["environment"] = env;
    j["num_seeds"] = spec.num_seeds;
    j["base_seed"] = spec.base_seed;
    j["T"] = spec.iterations;
    j["stride"] = spec.stride;
    j["delta"] = spec.delta;
    j["phi"] = spec.phi;
    j["c_tilde1"] = spec.c_tilde1;
    j["kappa_mode"] = to_string(spec.kappa_mode);
    j["kappa"] = spec.kappa_explicit;
    j["out_dir"] = spec.out_dir;
    j["workers"] = spec.workers;
    return j.dump(2) + "\n";
}

ExperimentSpec load_experiment_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open experiment spec: " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("experiment spec is not valid JSON: ") + e.what());
    }

    ExperimentSpec spec;
    const auto& env = j.at("environment");
    const std::string type = env.at("type").get<std::string>();
    if (type == "queue") {
        spec.env_kind = ExperimentSpec::EnvKind::queue;
        if (env.contains("buffer_size")) spec.queue.buffer_size = env["buffer_size"].get<int>();
        if (env.contains("service_levels"))
            spec.queue.service_levels = env["service_levels"].get<std::vector<double>>();
        if (env.contains("flow_levels"))
            spec.queue.flow_levels = env["flow_levels"].get<std::vector<double>>();
        if (env.contains("gamma")) spec.queue.gamma = env["gamma"].get<double>();
    } else if (type == "random") {
        spec.env_kind = ExperimentSpec::EnvKind::random;
        auto& r = spec.random;
        if (env.contains("num_states")) r.num_states = env["num_states"].get<int>();
        if (env.contains("num_actions")) r.num_actions = env["num_actions"].get<int>();
        if (env.contains("num_constraints"))
            r.num_constraints = env["num_constraints"].get<int>();
        if (env.contains("slater_margin_target"))
            r.slater_margin_target = env["slater_margin_target"].get<double>();
        if (env.contains("gamma")) r.gamma = env["gamma"].get<double>();
        if (env.contains("model_seed")) r.model_seed = env["model_seed"].get<std::uint64_t>();
    } else if (type == "file") {
        spec.env_kind = ExperimentSpec::EnvKind::file;
        spec.model_file = env.at("path").get<std::string>();
        if (!std::filesystem::exists(spec.model_file))
            throw std::invalid_argument("experiment spec references a missing model file: " +
                                        spec.model_file);
    } else {
        throw std::invalid_argument("unknown environment type: " + type);
    }

    if (j.contains("num_seeds")) spec.num_seeds = j["num_seeds"].get<int>();
    if (j.contains("base_seed")) spec.base_seed = j["base_seed"].get<std::uint64_t>();
    if (j.contains("T")) spec.iterations = j["T"].get<std::int64_t>();
    if (j.contains("stride")) spec.stride = j["stride"].get<std::int64_t>();
    if (j.contains("delta")) spec.delta = j["delta"].get<double>();
    if (j.contains("phi")) spec.phi = j["phi"].get<double>();
    if (j.contains("c_tilde1")) spec.c_tilde1 = j["c_tilde1"].get<double>();
    if (j.contains("kappa_mode")) {
        const std::string mode = j["kappa_mode"].get<std::string>();
        if (mode == "auto")
            spec.kappa_mode = KappaMode::auto_derived;
        else if (mode == "zero")
            spec.kappa_mode = KappaMode::zero;
        else if (mode == "explicit")
            spec.kappa_mode = KappaMode::explicit_value;
        else
            throw std::invalid_argument("unknown kappa_mode: " + mode);
    }
    if (j.contains("kappa")) spec.kappa_explicit = j["kappa"].get<double>();
    if (j.contains("out_dir")) spec.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("workers")) spec.workers = j["workers"].get<int>();
    if (spec.num_seeds < 1) throw std::invalid_argument("num_seeds must be >= 1");
    return spec;
}

CmdpModel build_model(const ExperimentSpec& spec) {
    switch (spec.env_kind) {
        case ExperimentSpec::EnvKind::queue:
            return build_queue_cmdp(spec.queue);
        case ExperimentSpec::EnvKind::random:
            return random_cmdp(spec.random.num_states, spec.random.num_actions,
                               spec.random.num_constraints, spec.random.slater_margin_target,
                               spec.random.model_seed, spec.random.gamma);
        case ExperimentSpec::EnvKind::file:
            return load_model(spec.model_file);
    }
    throw std::logic_error("unreachable");
}

OracleGapReport compare_to_oracle(const CmdpModel& model, const OccupancyMeasure& avg_lambda,
                                  double kappa) {
    (void)kappa;  // the reference optimum is always the untightened problem
    const auto oracle = solve_cmdp_lp(model, 0.0);
    if (oracle.status != LpStatus::optimal)
        throw std::runtime_error("compare_to_oracle: oracle LP not optimal");

    OracleGapReport rep;
    rep.occupancy_gap = oracle.objective - sa_dot(avg_lambda, model.reward);
    rep.min_constraint = std::numeric_limits<double>::infinity();
    for (int i = 0; i < model.num_constraints; ++i)
        rep.min_constraint =
            std::min(rep.min_constraint, sa_dot(avg_lambda, model.constraint_costs[i]));
    if (model.num_constraints == 0) rep.min_constraint = 0.0;
    rep.flow_res = flow_residual(model, avg_lambda);

    const Policy pi_star = policy_from_occupancy(oracle.lambda_star);
    const Policy pi_bar = policy_from_occupancy(avg_lambda);
    const ValueReport v_star = evaluate_policy(model, pi_star);
    const ValueReport v_bar = evaluate_policy(model, pi_bar);
    rep.policy_gap = v_star.objective - v_bar.objective;
    rep.j_constraints = v_bar.constraint_values;
    return rep;
}

std::string run_record_csv(const RunRecord& record, int num_constraints) {
    std::ostringstream out;
    out << "t";
    for (const auto& c : column_names(num_constraints)) out << "," << c;
    out << "\n";
    for (const auto& row : record.rows) {
        out << row.t;
        for (double v : row_values(row)) out << "," << fmt17(v);
        out << "\n";
    }
    return out.str();
}

AggregateTable aggregate_records(const std::vector<RunRecord>& records, int num_constraints) {
    AggregateTable table;
    table.columns = column_names(num_constraints);
    const RunRecord* first = nullptr;
    int used = 0;
    for (const auto& r : records)
        if (!r.failed) {
            if (!first) first = &r;
            ++used;
        }
    if (!first) return table;

    const std::size_t rows = first->rows.size();
    const std::size_t cols = table.columns.size();
    table.ts.resize(rows);
    for (std::size_t k = 0; k < rows; ++k) table.ts[k] = first->rows[k].t;
    table.mean.assign(rows, std::vector<double>(cols, 0.0));
    table.stddev.assign(rows, std::vector<double>(cols, 0.0));

    for (const auto& r : records) {
        if (r.failed) continue;
        if (r.rows.size() != rows)
            throw std::runtime_error("aggregate_records: inconsistent row counts across seeds");
        for (std::size_t k = 0; k < rows; ++k) {
            const auto vals = row_values(r.rows[k]);
            for (std::size_t c = 0; c < cols; ++c) table.mean[k][c] += vals[c];
        }
    }
    for (auto& row : table.mean)
        for (double& v : row) v /= used;
    for (const auto& r : records) {
        if (r.failed) continue;
        for (std::size_t k = 0; k < rows; ++k) {
            const auto vals = row_values(r.rows[k]);
            for (std::size_t c = 0; c < cols; ++c) {
                const double d = vals[c] - table.mean[k][c];
                table.stddev[k][c] += d * d;
            }
        }
    }
    for (auto& row : table.stddev)
        for (double& v : row) v = std::sqrt(v / used);
    return table;
}

std::string aggregate_csv(const AggregateTable& table) {
    std::ostringstream out;
    out << "t";
    for (const auto& c : table.columns) out << "," << c << "_mean," << c << "_std";
    out << "\n";
    for (std::size_t k = 0; k < table.ts.size(); ++k) {
        out << table.ts[k];
        for (std::size_t c = 0; c < table.columns.size(); ++c)
            out << "," << fmt17(table.mean[k][c]) << "," << fmt17(table.stddev[k][c]);
        out << "\n";
    }
    return out.str();
}

namespace {

SolverConfig make_config(const ExperimentSpec& spec, const CmdpModel& model) {
    SolverConfig cfg =
        derive_schedule(model, spec.phi, spec.c_tilde1, spec.iterations, model.g_max);
    cfg.delta = spec.delta;
    cfg.log_every = spec.effective_stride();
    cfg.check_invariants = spec.check_invariants;
    switch (spec.kappa_mode) {
        case KappaMode::auto_derived:
            break;
        case KappaMode::zero:
            cfg.kappa = 0.0;
            break;
        case KappaMode::explicit_value:
            cfg.kappa = spec.kappa_explicit;
            break;
    }
    return cfg;
}

RunRecord run_one_seed(const CmdpModel& model, const TabularGenerativeModel& env,
                       SolverConfig cfg, std::uint64_t seed, double oracle_objective) {
    RunRecord record;
    record.seed = seed;
    cfg.seed = seed;
    try {
        LogObserver observer = [&](const IterateRow& row, const OccupancyMeasure& avg) {
            RunRecord::Row out;
            out.t = row.t;
            out.obj_avg = row.avg_objective;
            out.g_avg = row.avg_constraint_values;
            out.flow_res = row.avg_flow_res;
            const Policy pi_bar = policy_from_occupancy(avg);
            const ValueReport vr = evaluate_policy(model, pi_bar);
            out.j_r = vr.objective;
            out.j_g = vr.constraint_values;
            record.rows.push_back(std::move(out));
        };
        SolverResult result = run(model, env, cfg, observer);
        record.final_avg_lambda = std::move(result.avg_lambda);
        record.final_lp_gap =
            oracle_objective - sa_dot(record.final_avg_lambda, model.reward);
    } catch (const std::exception& e) {
        record.failed = true;
        record.error = e.what();
    }
    return record;
}

void write_experiment_outputs(const ExperimentSpec& spec, const ExperimentResult& result) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::path(spec.out_dir) / ("kappa_" + std::string(to_string(
                                                   spec.kappa_mode)));
    fs::create_directories(dir);

    for (const auto& record : result.records) {
        char name[64];
        std::snprintf(name, sizeof(name), "seed_%04llu.csv",
                      static_cast<unsigned long long>(record.seed));
        std::ofstream out(dir / name, std::ios::binary);
        if (record.failed)
            out << "# run failed: " << record.error << "\n";
        else
            out << run_record_csv(record, result.model.num_constraints);
    }
    {
        std::ofstream out(dir / "aggregate.csv", std::ios::binary);
        out << aggregate_csv(result.aggregate);
    }

    // One plot per plotted quantity: objective and each policy-space
    // constraint value, mean with +/- one std band.
    const auto& table = result.aggregate;
    if (table.ts.empty()) return;
    std::vector<double> xs(table.ts.begin(), table.ts.end());
    auto col_index = [&](const std::string& name) {
        for (std::size_t c = 0; c < table.columns.size(); ++c)
            if (table.columns[c] == name) return static_cast<int>(c);
        return -1;
    };
    auto series_for = [&](const std::string& name, const std::string& label) {
        PlotSeries s;
        s.label = label;
        s.color = kPalette[0];
        s.x = xs;
        const int c = col_index(name);
        for (std::size_t k = 0; k < table.ts.size(); ++k) {
            s.y.push_back(table.mean[k][c]);
            s.spread.push_back(table.stddev[k][c]);
        }
        return s;
    };
    write_svg_plot((dir / "objective.svg").string(), "Running objective", "iteration t",
                   "J_r(pi_bar_t)", {series_for("J_r", "mean +/- std")});
    for (int i = 1; i <= result.model.num_constraints; ++i) {
        write_svg_plot((dir / ("constraint_" + std::to_string(i) + ".svg")).string(),
                       "Running constraint value " + std::to_string(i), "iteration t",
                       "J_g" + std::to_string(i) + "(pi_bar_t)",
                       {series_for("J_g" + std::to_string(i), "mean +/- std")});
    }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    ExperimentResult result;
    result.model = build_model(spec);
    result.config = make_config(spec, result.model);

    const auto oracle = solve_cmdp_lp(result.model, 0.0);
    if (oracle.status != LpStatus::optimal)
        throw std::runtime_error("run_experiment: oracle LP not optimal");
    result.oracle_objective = oracle.objective;

    const TabularGenerativeModel env(result.model);
    result.records.resize(spec.num_seeds);

    int workers = spec.workers > 0 ? spec.workers
                                   : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, spec.num_seeds));

    std::atomic<int> next{0};
    auto worker = [&]() {
        while (true) {
            const int k = next.fetch_add(1);
            if (k >= spec.num_seeds) break;
            result.records[k] = run_one_seed(result.model, env, result.config,
                                             spec.base_seed + static_cast<std::uint64_t>(k),
                                             result.oracle_objective);
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    result.aggregate = aggregate_records(result.records, result.model.num_constraints);
    if (!spec.out_dir.empty()) write_experiment_outputs(spec, result);
    return result;
}

ComparisonResult run_comparison(const ExperimentSpec& spec) {
    ExperimentSpec conservative = spec;
    conservative.kappa_mode = KappaMode::auto_derived;
    ExperimentSpec plain = spec;
    plain.kappa_mode = KappaMode::zero;

    ComparisonResult cmp;
    cmp.conservative = run_experiment(conservative);
    cmp.plain = run_experiment(plain);

    if (!spec.out_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(spec.out_dir);
        const auto& ta = cmp.conservative.aggregate;
        const auto& tz = cmp.plain.aggregate;
        if (!ta.ts.empty() && !tz.ts.empty()) {
            auto overlay = [&](const std::string& name, const std::string& title,
                               const std::string& ylabel, const std::string& file) {
                auto build = [&](const AggregateTable& t, const std::string& label,
                                 const char* color) {
                    PlotSeries s;
                    s.label = label;
                    s.color = color;
                    int c = -1;
                    for (std::size_t k = 0; k < t.columns.size(); ++k)
                        if (t.columns[k] == name) c = static_cast<int>(k);
                    s.x.assign(t.ts.begin(), t.ts.end());
                    for (std::size_t k = 0; k < t.ts.size(); ++k) {
                        s.y.push_back(t.mean[k][c]);
                        s.spread.push_back(t.stddev[k][c]);
                    }
                    return s;
                };
                write_svg_plot((fs::path(spec.out_dir) / file).string(), title, "iteration t",
                               ylabel,
                               {build(ta, "kappa > 0", kPalette[0]),
                                build(tz, "kappa = 0", kPalette[1])});
            };
            overlay("J_r", "Running objective", "J_r(pi_bar_t)", "objective.svg");
            for (int i = 1; i <= cmp.conservative.model.num_constraints; ++i) {
                const std::string gi = "J_g" + std::to_string(i);
                overlay(gi, "Running constraint value " + std::to_string(i), gi + "(pi_bar_t)",
                        "constraint_" + std::to_string(i) + ".svg");
            }
        }
    }
    return cmp;
}

}  // namespace cspda
