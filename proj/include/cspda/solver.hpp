#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cspda/environments.hpp"
#include "cspda/lagrangian.hpp"
#include "cspda/types.hpp"

namespace cspda {

/// All CSPDA hyperparameters. derive_schedule fills every derived field
/// from (T, phi, c_tilde1, g_max):
///   kappa    = (2 c1 / (1-gamma)) sqrt(I |S||A| log(|S||A|) / T)
///   M        = 4 [ g_max/phi + 1/(1-gamma) + 2 g_max/((1-gamma) phi) ]
///   alpha    = sqrt(|S|) / ((1-gamma) phi sqrt(T I))   (I treated as 1 when 0)
///   beta     = (1-gamma) phi sqrt(log(|S||A|) / (T |S||A|))
///   u_radius = 4/phi
///   v_radius = 2 [ 1/(1-gamma) + 2 g_max/((1-gamma) phi) ]
/// The g_max factors extend the unit-cost constants to models whose
/// constraint costs exceed [-1, 1] (they scale linearly through the same
/// bound chain).
struct SolverConfig {
    std::int64_t iterations = 0;  // T
    double delta = 0.25;          // sampling mixture weight, in (0, 1/2)
    double phi = 0.0;             // Slater margin used by the schedule
    double c_tilde1 = 0.0;
    double kappa = 0.0;
    double shift_m = 0.0;  // M
    double alpha = 0.0;
    double beta = 0.0;
    double u_radius = 0.0;
    double v_radius = 0.0;
    std::uint64_t seed = 1;
    std::int64_t log_every = 1000;
    bool check_invariants = false;  // verify u/v ball membership every iteration

    void validate() const;
};

/// Derives the full parameter schedule. Throws a configuration error naming
/// the minimal admissible T when T is too small for kappa <= min(phi/2, 1).
SolverConfig derive_schedule(const CmdpModel& model, double phi, double c_tilde1, std::int64_t T,
                             double g_max);

/// Euclidean projection onto { u >= 0, ||u||_1 <= radius } via sort-based
/// thresholding.
std::vector<double> project_u(std::vector<double> u, double radius);

/// Euclidean projection onto the l-infinity ball (coordinatewise clip).
std::vector<double> project_v(std::vector<double> v, double radius);

/// Closed-form entropic mirror-ascent step for a one-coordinate gradient:
/// multiplies lambda(s,a) by exp(beta * grad_entry) and renormalizes.
/// Exponent arguments are clamped at +50; a positive grad_entry indicates a
/// misconfigured shift M and produces a one-time warning on stderr.
OccupancyMeasure mirror_step(const OccupancyMeasure& lambda, double grad_entry, int s, int a,
                             double beta);

struct IterateRow {
    std::int64_t t = 0;
    double objective = 0.0;  // <lambda^t, r>
    std::vector<double> constraint_values;
    double flow_res = 0.0;
    double u_norm1 = 0.0;
    double v_norm_inf = 0.0;
    double avg_objective = 0.0;  // same quantities for the running averages
    std::vector<double> avg_constraint_values;
    double avg_flow_res = 0.0;
    double avg_u_norm1 = 0.0;
    double avg_v_norm_inf = 0.0;
};

struct IterateLog {
    std::vector<IterateRow> rows;
};

struct SolverResult {
    OccupancyMeasure avg_lambda;  // (1/T) sum_t lambda^t
    DualVars avg_duals;           // (1/T) sum_t (u^t, v^t), radii copied from config
    IterateLog log;
    std::int64_t positive_delta_count = 0;  // mirror exponents > 0 seen (should be 0)
};

/// Invoked at every logged iterate with the row and the running-average
/// occupancy measure at that point.
using LogObserver = std::function<void(const IterateRow&, const OccupancyMeasure&)>;

/// Runs CSPDA for config.iterations steps against the generative model.
/// lambda^1 is uniform, u^1 = v^1 = 0. Each iteration samples
/// (s,a) ~ zeta^t = (1-delta) lambda^t + delta/(SA), s0 ~ rho and
/// s' ~ env, applies the projected dual steps and the entropic mirror step,
/// and accumulates the uniform iterate averages.
///
/// The primal iterate is kept as log-weights plus a scalar log-normalizer;
/// zeta sampling uses an incrementally updated sum tree over the weights,
/// rebuilt in full every |S||A| iterations to contain float drift. Iterate
/// sums use compensated summation. Identical (model, config, seed) yield a
/// bit-identical IterateLog.
SolverResult run(const CmdpModel& model, const GenerativeModel& env, const SolverConfig& config,
                 const LogObserver& observer = nullptr);

}  // namespace cspda
