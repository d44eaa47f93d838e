#pragma once

#include <memory>
#include <vector>

#include "cspda/cmdp_core.hpp"
#include "cspda/types.hpp"

namespace cspda {

/// Sampling oracle over a CMDP: given (s, a) it draws the next state and
/// reveals reward/costs. Environments are immutable; all sampling goes
/// through a caller-provided RNG so parallel streams stay independent.
class GenerativeModel {
public:
    virtual ~GenerativeModel() = default;
    virtual int num_states() const = 0;
    virtual int num_actions() const = 0;
    virtual int num_constraints() const = 0;
    virtual int sample_next(int s, int a, Rng& rng) const = 0;
    virtual int initial_sample(Rng& rng) const = 0;
    virtual double reward(int s, int a) const = 0;
    virtual double cost(int i, int s, int a) const = 0;
};

/// Generative model backed by an explicit CmdpModel. Row CDFs are
/// precomputed so next-state draws cost O(log |S|).
class TabularGenerativeModel final : public GenerativeModel {
public:
    explicit TabularGenerativeModel(const CmdpModel& model);

    int num_states() const override { return model_.num_states; }
    int num_actions() const override { return model_.num_actions; }
    int num_constraints() const override { return model_.num_constraints; }
    int sample_next(int s, int a, Rng& rng) const override;
    int initial_sample(Rng& rng) const override;
    double reward(int s, int a) const override { return model_.r(s, a); }
    double cost(int i, int s, int a) const override { return model_.g(i, s, a); }

    const CmdpModel& model() const { return model_; }

private:
    CmdpModel model_;
    std::vector<double> row_cdf_;  // per (a,s): cumulative next-state probabilities
    std::vector<double> rho_cdf_;
};

/// Single-server queue with buffer size L, product action space A x B
/// (service probability a, arrival probability b). State = queue length.
struct QueueParams {
    int buffer_size = 5;
    std::vector<double> service_levels = {0.2, 0.4, 0.6, 0.8};
    std::vector<double> flow_levels = {0.4, 0.5, 0.6, 0.7};
    double gamma = 0.5;

    // Raw cost/constraint coefficients; the raw objective is c(s) = -s + 5.
    double reward_scale = 5.0;  // stored reward is c / reward_scale, in [0, 1]

    int num_states() const { return buffer_size + 1; }
    int num_actions() const {
        return static_cast<int>(service_levels.size() * flow_levels.size());
    }
    // Action index k encodes (service, flow) as k = service_idx * |B| + flow_idx.
    double service_of(int k) const { return service_levels[k / flow_levels.size()]; }
    double flow_of(int k) const { return flow_levels[k % flow_levels.size()]; }
};

/// Next-state distribution of the queue for state x under (a, b):
///   1 <= x <= L-1: P(x-1) = a(1-b), P(x) = ab + (1-a)(1-b), P(x+1) = (1-a)b
///   x = L:         P(L-1) = a,      P(L) = 1-a
///   x = 0:         P(0) = 1 - b(1-a), P(1) = b(1-a)
/// Rows sum to 1 identically.
std::vector<double> queue_transition(int x, double service, double flow, int buffer_size);

/// Builds the queue CMDP: objective c(s) = -s + 5 stored rescaled to [0,1],
/// service constraint c1(a) = -10a + 3, flow constraint c2(b) = -8(1-b)^2 + 1.2,
/// uniform initial distribution, g_max = max |c_i| over the action grid.
CmdpModel build_queue_cmdp(const QueueParams& params);

/// Seeded random CMDP: Dirichlet(1,..,1) transition rows and initial
/// distribution, rewards uniform in [0,1], constraint costs uniform in
/// [-1,1] resampled until the LP oracle certifies a Slater margin of at
/// least slater_margin_target. Throws after max_retries failures.
CmdpModel random_cmdp(int num_states, int num_actions, int num_constraints,
                      double slater_margin_target, std::uint64_t seed, double gamma = 0.8,
                      int max_retries = 50);

}  // namespace cspda
