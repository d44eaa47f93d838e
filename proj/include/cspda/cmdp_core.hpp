#pragma once

#include <cstdint>
#include <random>

#include "cspda/types.hpp"

namespace cspda {

using Rng = std::mt19937_64;

/// Recovers the policy induced by an occupancy measure via row
/// normalization, pi(a|s) = lambda(s,a) / sum_a' lambda(s,a').
/// States with zero marginal get the uniform action distribution, which
/// makes the map total and deterministic.
Policy policy_from_occupancy(const OccupancyMeasure& lambda);

/// Exact occupancy measure of a policy:
///   lambda = (1-gamma) (I - gamma P_pi^T)^{-1} rho_pi
/// over state-action space, where P_pi((s,a),(s',a')) = P_a(s,s') pi(a'|s')
/// and rho_pi(s,a) = rho(s) pi(a|s). Solved with a dense partial-pivot LU.
OccupancyMeasure occupancy_from_policy(const CmdpModel& model, const Policy& pi);

/// l1 norm of  sum_a (gamma P_a^T - I) lambda_a + (1-gamma) rho.
/// Zero exactly when lambda is a genuine occupancy measure for the model.
double flow_residual(const CmdpModel& model, const OccupancyMeasure& lambda);

/// Exact policy evaluation through the occupancy measure:
/// objective <lambda, r>, constraint values <lambda, g_i>, flow residual.
ValueReport evaluate_policy(const CmdpModel& model, const Policy& pi);

/// Monte Carlo value estimate with per-quantity standard errors.
struct McEstimate {
    double objective_mean = 0.0;
    double objective_stderr = 0.0;
    std::vector<double> constraint_means;
    std::vector<double> constraint_stderrs;
    std::int64_t num_rollouts = 0;
};

/// Unbiased Monte Carlo estimate of the normalized values: each rollout
/// draws a horizon H ~ Geometric(1-gamma) (number of steps, H >= 1), rolls
/// the chain H steps from s0 ~ rho, sums rewards/costs, and the per-rollout
/// totals are averaged and scaled by (1-gamma).
McEstimate mc_value_estimate(const CmdpModel& model, const Policy& pi, std::int64_t num_rollouts,
                             std::uint64_t rng_seed);

/// <lambda, x> for a state-action table x laid out like the reward table.
double sa_dot(const OccupancyMeasure& lambda, const std::vector<double>& table);

}  // namespace cspda
