#include "cspda/types.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cspda {

namespace {

void fail(const std::string& msg) { throw std::invalid_argument(msg); }

}  // namespace

void CmdpModel::validate() const {
    if (num_states < 1) fail("num_states must be >= 1");
    if (num_actions < 1) fail("num_actions must be >= 1");
    if (num_constraints < 0) fail("num_constraints must be >= 0");
    if (!(discount > 0.0 && discount < 1.0)) fail("discount must lie in (0, 1)");
    if (!(g_max > 0.0)) fail("g_max must be positive");

    const std::size_t want_p = static_cast<std::size_t>(num_actions) * num_states * num_states;
    if (transition.size() != want_p) fail("transition has wrong size");
    if (reward.size() != static_cast<std::size_t>(num_states) * num_actions)
        fail("reward has wrong size");
    if (constraint_costs.size() != static_cast<std::size_t>(num_constraints))
        fail("constraint_costs has wrong outer size");
    if (initial_dist.size() != static_cast<std::size_t>(num_states))
        fail("initial_dist has wrong size");

    for (int a = 0; a < num_actions; ++a) {
        for (int s = 0; s < num_states; ++s) {
            double row = 0.0;
            for (int s2 = 0; s2 < num_states; ++s2) {
                const double v = p(a, s, s2);
                if (v < 0.0) {
                    std::ostringstream os;
                    os << "transition[a=" << a << "][s=" << s << "][s'=" << s2
                       << "] = " << v << " is negative";
                    fail(os.str());
                }
                row += v;
            }
            if (std::abs(row - 1.0) > kInputProbTol) {
                std::ostringstream os;
                os << "transition[a=" << a << "][s=" << s << "] row sums to " << row
                   << " (tolerance 1e-12)";
                fail(os.str());
            }
        }
    }

    double rho_sum = 0.0;
    for (int s = 0; s < num_states; ++s) {
        if (initial_dist[s] < 0.0) {
            std::ostringstream os;
            os << "initial_dist[s=" << s << "] = " << initial_dist[s] << " is negative";
            fail(os.str());
        }
        rho_sum += initial_dist[s];
    }
    if (std::abs(rho_sum - 1.0) > kInputProbTol) {
        std::ostringstream os;
        os << "initial_dist sums to " << rho_sum << " (tolerance 1e-12)";
        fail(os.str());
    }

    for (int s = 0; s < num_states; ++s) {
        for (int a = 0; a < num_actions; ++a) {
            const double v = r(s, a);
            if (v < 0.0 || v > 1.0) {
                std::ostringstream os;
                os << "reward[s=" << s << "][a=" << a << "] = " << v << " outside [0, 1]";
                fail(os.str());
            }
        }
    }
    for (int i = 0; i < num_constraints; ++i) {
        if (constraint_costs[i].size() != static_cast<std::size_t>(num_states) * num_actions) {
            std::ostringstream os;
            os << "constraint_costs[i=" << i << "] has wrong size";
            fail(os.str());
        }
        for (int s = 0; s < num_states; ++s) {
            for (int a = 0; a < num_actions; ++a) {
                const double v = g(i, s, a);
                if (std::abs(v) > g_max) {
                    std::ostringstream os;
                    os << "constraint_costs[i=" << i << "][s=" << s << "][a=" << a << "] = " << v
                       << " outside [-g_max, g_max] with g_max = " << g_max;
                    fail(os.str());
                }
            }
        }
    }
}

OccupancyMeasure OccupancyMeasure::uniform(int num_states, int num_actions) {
    OccupancyMeasure m;
    m.num_states = num_states;
    m.num_actions = num_actions;
    m.lambda.assign(static_cast<std::size_t>(num_states) * num_actions,
                    1.0 / (static_cast<double>(num_states) * num_actions));
    return m;
}

void OccupancyMeasure::validate() const {
    if (lambda.size() != static_cast<std::size_t>(num_states) * num_actions)
        fail("occupancy measure has wrong size");
    double sum = 0.0;
    for (std::size_t k = 0; k < lambda.size(); ++k) {
        if (lambda[k] < 0.0) {
            std::ostringstream os;
            os << "lambda[s=" << k / num_actions << "][a=" << k % num_actions << "] = " << lambda[k]
               << " is negative";
            fail(os.str());
        }
        sum += lambda[k];
    }
    if (std::abs(sum - 1.0) > kComputedProbTol) {
        std::ostringstream os;
        os << "occupancy measure sums to " << sum << " (tolerance 1e-9)";
        fail(os.str());
    }
}

Policy Policy::uniform(int num_states, int num_actions) {
    Policy p;
    p.num_states = num_states;
    p.num_actions = num_actions;
    p.pi.assign(static_cast<std::size_t>(num_states) * num_actions, 1.0 / num_actions);
    return p;
}

void Policy::validate() const {
    if (pi.size() != static_cast<std::size_t>(num_states) * num_actions)
        fail("policy has wrong size");
    for (int s = 0; s < num_states; ++s) {
        double row = 0.0;
        for (int a = 0; a < num_actions; ++a) {
            const double v = at(s, a);
            if (v < 0.0) {
                std::ostringstream os;
                os << "pi[s=" << s << "][a=" << a << "] = " << v << " is negative";
                fail(os.str());
            }
            row += v;
        }
        if (std::abs(row - 1.0) > kComputedProbTol) {
            std::ostringstream os;
            os << "pi row s=" << s << " sums to " << row << " (tolerance 1e-9)";
            fail(os.str());
        }
    }
}

}  // namespace cspda
