#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cspda/environments.hpp"
#include "cspda/lp_oracle.hpp"
#include "cspda/solver.hpp"
#include "cspda/types.hpp"

namespace cspda {

enum class KappaMode { auto_derived, zero, explicit_value };

const char* to_string(KappaMode mode);

/// Declarative description of a seeded solver sweep.
struct ExperimentSpec {
    enum class EnvKind { queue, random, file };
    EnvKind env_kind = EnvKind::queue;
    QueueParams queue;
    struct RandomParams {
        int num_states = 4;
        int num_actions = 3;
        int num_constraints = 1;
        double slater_margin_target = 0.1;
        double gamma = 0.8;
        std::uint64_t model_seed = 7;
    } random;
    std::string model_file;  // for EnvKind::file

    int num_seeds = 50;
    std::uint64_t base_seed = 1;
    std::int64_t iterations = 100000;
    std::int64_t stride = 0;  // 0 = iterations / 500 (at least 1)
    double delta = 0.25;
    double phi = 0.2;
    double c_tilde1 = 0.02;
    KappaMode kappa_mode = KappaMode::auto_derived;
    double kappa_explicit = 0.0;
    std::string out_dir;  // empty = no files written
    int workers = 0;      // 0 = hardware concurrency
    bool check_invariants = false;  // forwarded to SolverConfig

    std::int64_t effective_stride() const {
        return stride > 0 ? stride : std::max<std::int64_t>(1, iterations / 500);
    }
};

ExperimentSpec load_experiment_spec(const std::string& path);
std::string experiment_spec_to_json(const ExperimentSpec& spec);

/// One solver run. CSV rows follow the fixed column order
///   t, obj_avg, g1..gI, flow_res, J_r, J_g1..J_gI
/// where obj_avg / g_i / flow_res are occupancy-space quantities of the
/// running average lambda-bar and J_* are exact policy-space values of the
/// policy induced by lambda-bar.
struct RunRecord {
    std::uint64_t seed = 0;
    struct Row {
        std::int64_t t = 0;
        double obj_avg = 0.0;
        std::vector<double> g_avg;
        double flow_res = 0.0;
        double j_r = 0.0;
        std::vector<double> j_g;
    };
    std::vector<Row> rows;
    OccupancyMeasure final_avg_lambda;
    double final_lp_gap = 0.0;  // <lambda*, r> - <lambda_bar, r>, kappa = 0 oracle
    bool failed = false;
    std::string error;
};

/// Per-column mean and (population) standard deviation across seeds.
struct AggregateTable {
    std::vector<std::string> columns;  // names excluding the leading t
    std::vector<std::int64_t> ts;
    std::vector<std::vector<double>> mean;  // [row][column]
    std::vector<std::vector<double>> stddev;
};

struct ExperimentResult {
    CmdpModel model;
    SolverConfig config;  // schedule shared by all seeds (seed field varies)
    std::vector<RunRecord> records;
    AggregateTable aggregate;
    double oracle_objective = 0.0;  // kappa = 0 LP optimum
};

CmdpModel build_model(const ExperimentSpec& spec);

/// Runs num_seeds independent solver runs (parallel across seeds), writes
/// per-seed CSVs, an aggregate CSV and SVG plots under out_dir (when set),
/// and returns everything. Seed failures are recorded without aborting the
/// sweep.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Runs the auto-kappa and zero-kappa sweeps on the same seeds and writes
/// overlay plots plus a text summary.
struct ComparisonResult {
    ExperimentResult conservative;  // kappa > 0
    ExperimentResult plain;         // kappa = 0
};

ComparisonResult run_comparison(const ExperimentSpec& spec);

/// Gap report against the exact LP oracle.
struct OracleGapReport {
    double occupancy_gap = 0.0;      // <lambda*, r> - <lambda_bar, r>
    double min_constraint = 0.0;     // min_i <lambda_bar, g_i>
    double flow_res = 0.0;
    double policy_gap = 0.0;         // J_r(pi*) - J_r(pi_bar)
    std::vector<double> j_constraints;  // J_{g_i}(pi_bar)
};

OracleGapReport compare_to_oracle(const CmdpModel& model, const OccupancyMeasure& avg_lambda,
                                  double kappa);

/// CSV helpers (schema documented on RunRecord / AggregateTable).
std::string run_record_csv(const RunRecord& record, int num_constraints);
std::string aggregate_csv(const AggregateTable& table);
AggregateTable aggregate_records(const std::vector<RunRecord>& records, int num_constraints);

}  // namespace cspda
