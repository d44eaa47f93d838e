#pragma once

#include <string>
#include <vector>

namespace cspda {

/// Finite discounted CMDP: states S, actions A, I constraint cost functions.
///
/// Layout conventions (used everywhere in this library):
///   transition[a * S * S + s * S + s2]   = P(s2 | s, a)
///   reward[s * A + a]                    = r(s, a), in [0, 1]
///   constraint_costs[i][s * A + a]       = g_i(s, a), in [-g_max, g_max]
///
/// Instances are immutable by convention after construction and safe to
/// share read-only across threads.
struct CmdpModel {
    int num_states = 0;
    int num_actions = 0;
    int num_constraints = 0;
    std::vector<double> transition;
    std::vector<double> reward;
    std::vector<std::vector<double>> constraint_costs;
    double discount = 0.0;
    std::vector<double> initial_dist;
    double g_max = 1.0;

    double p(int a, int s, int s2) const {
        return transition[static_cast<std::size_t>(a) * num_states * num_states +
                          static_cast<std::size_t>(s) * num_states + s2];
    }
    double r(int s, int a) const { return reward[static_cast<std::size_t>(s) * num_actions + a]; }
    double g(int i, int s, int a) const {
        return constraint_costs[i][static_cast<std::size_t>(s) * num_actions + a];
    }
    int num_pairs() const { return num_states * num_actions; }

    /// Checks all model invariants; throws std::invalid_argument naming the
    /// first violated one (with indices).
    void validate() const;
};

/// Occupancy measure: a distribution over state-action pairs, flattened
/// as lambda[s * A + a].
struct OccupancyMeasure {
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> lambda;

    double at(int s, int a) const { return lambda[static_cast<std::size_t>(s) * num_actions + a]; }
    double& at(int s, int a) { return lambda[static_cast<std::size_t>(s) * num_actions + a]; }

    static OccupancyMeasure uniform(int num_states, int num_actions);

    void validate() const;
};

/// Stationary stochastic policy; pi[s * A + a] = probability of a in s.
struct Policy {
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> pi;

    double at(int s, int a) const { return pi[static_cast<std::size_t>(s) * num_actions + a]; }
    double& at(int s, int a) { return pi[static_cast<std::size_t>(s) * num_actions + a]; }

    static Policy uniform(int num_states, int num_actions);

    void validate() const;
};

/// Exact evaluation of a policy: normalized objective value, one value per
/// constraint, and the l1 flow residual of the induced occupancy measure.
struct ValueReport {
    double objective = 0.0;
    std::vector<double> constraint_values;
    double flow_residual = 0.0;
};

// Tolerances: model inputs are held to 1e-12, computed distributions to 1e-9.
inline constexpr double kInputProbTol = 1e-12;
inline constexpr double kComputedProbTol = 1e-9;

}  // namespace cspda
