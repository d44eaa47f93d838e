#include "cspda/environments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cspda/lp_oracle.hpp"

namespace cspda {

TabularGenerativeModel::TabularGenerativeModel(const CmdpModel& model) : model_(model) {
    model_.validate();
    const int S = model_.num_states;
    const int A = model_.num_actions;
    row_cdf_.resize(static_cast<std::size_t>(A) * S * S);
    for (int a = 0; a < A; ++a) {
        for (int s = 0; s < S; ++s) {
            double acc = 0.0;
            for (int s2 = 0; s2 < S; ++s2) {
                acc += model_.p(a, s, s2);
                row_cdf_[(static_cast<std::size_t>(a) * S + s) * S + s2] = acc;
            }
        }
    }
    rho_cdf_.resize(S);
    double acc = 0.0;
    for (int s = 0; s < S; ++s) {
        acc += model_.initial_dist[s];
        rho_cdf_[s] = acc;
    }
}

namespace {

int sample_cdf(const double* cdf, int n, double u) {
    const double* it = std::lower_bound(cdf, cdf + n, u);
    int k = static_cast<int>(it - cdf);
    return std::min(k, n - 1);
}

}  // namespace

int TabularGenerativeModel::sample_next(int s, int a, Rng& rng) const {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int S = model_.num_states;
    return sample_cdf(&row_cdf_[(static_cast<std::size_t>(a) * S + s) * S], S, unif(rng));
}

int TabularGenerativeModel::initial_sample(Rng& rng) const {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    return sample_cdf(rho_cdf_.data(), model_.num_states, unif(rng));
}

std::vector<double> queue_transition(int x, double service, double flow, int buffer_size) {
    const int L = buffer_size;
    if (x < 0 || x > L) throw std::invalid_argument("queue_transition: state out of range");
    std::vector<double> dist(L + 1, 0.0);
    const double a = service;
    const double b = flow;
    if (x == 0) {
        dist[0] = 1.0 - b * (1.0 - a);
        dist[1] = b * (1.0 - a);
    } else if (x == L) {
        dist[L - 1] = a;
        dist[L] = 1.0 - a;
    } else {
        dist[x - 1] = a * (1.0 - b);
        dist[x] = a * b + (1.0 - a) * (1.0 - b);
        dist[x + 1] = (1.0 - a) * b;
    }
    return dist;
}

CmdpModel build_queue_cmdp(const QueueParams& params) {
    const int L = params.buffer_size;
    if (L < 1) throw std::invalid_argument("build_queue_cmdp: buffer_size must be >= 1");
    for (double a : params.service_levels)
        if (!(a > 0.0 && a < 1.0))
            throw std::invalid_argument("build_queue_cmdp: service levels must lie in (0,1)");
    for (double b : params.flow_levels)
        if (!(b >= 0.0 && b < 1.0))
            throw std::invalid_argument("build_queue_cmdp: flow levels must lie in [0,1)");

    const int S = params.num_states();
    const int A = params.num_actions();

    CmdpModel m;
    m.num_states = S;
    m.num_actions = A;
    m.num_constraints = 2;
    m.discount = params.gamma;
    m.initial_dist.assign(S, 1.0 / S);
    m.transition.assign(static_cast<std::size_t>(A) * S * S, 0.0);
    m.reward.resize(static_cast<std::size_t>(S) * A);
    m.constraint_costs.assign(2, std::vector<double>(static_cast<std::size_t>(S) * A, 0.0));

    double g_max = 0.0;
    for (int k = 0; k < A; ++k) {
        const double a = params.service_of(k);
        const double b = params.flow_of(k);
        for (int x = 0; x <= L; ++x) {
            const auto row = queue_transition(x, a, b, L);
            for (int x2 = 0; x2 <= L; ++x2)
                m.transition[(static_cast<std::size_t>(k) * S + x) * S + x2] = row[x2];

            const double raw_reward = -static_cast<double>(x) + 5.0;
            m.reward[static_cast<std::size_t>(x) * A + k] = raw_reward / params.reward_scale;
            const double c1 = -10.0 * a + 3.0;
            const double c2 = -8.0 * (1.0 - b) * (1.0 - b) + 1.2;
            m.constraint_costs[0][static_cast<std::size_t>(x) * A + k] = c1;
            m.constraint_costs[1][static_cast<std::size_t>(x) * A + k] = c2;
            g_max = std::max({g_max, std::abs(c1), std::abs(c2)});
        }
    }
    m.g_max = g_max;
    m.validate();
    return m;
}

CmdpModel random_cmdp(int num_states, int num_actions, int num_constraints,
                      double slater_margin_target, std::uint64_t seed, double gamma,
                      int max_retries) {
    if (num_states < 1 || num_actions < 1 || num_constraints < 0)
        throw std::invalid_argument("random_cmdp: dimensions must be >= 1");
    Rng rng(seed);
    std::gamma_distribution<double> unit_gamma(1.0, 1.0);
    std::uniform_real_distribution<double> unif01(0.0, 1.0);
    std::uniform_real_distribution<double> unif11(-1.0, 1.0);

    auto dirichlet_row = [&](double* out, int n) {
        double sum = 0.0;
        for (int k = 0; k < n; ++k) {
            out[k] = unit_gamma(rng);
            sum += out[k];
        }
        for (int k = 0; k < n; ++k) out[k] /= sum;
    };

    CmdpModel m;
    m.num_states = num_states;
    m.num_actions = num_actions;
    m.num_constraints = num_constraints;
    m.discount = gamma;
    m.g_max = 1.0;
    m.transition.resize(static_cast<std::size_t>(num_actions) * num_states * num_states);
    for (int a = 0; a < num_actions; ++a)
        for (int s = 0; s < num_states; ++s)
            dirichlet_row(
                &m.transition[(static_cast<std::size_t>(a) * num_states + s) * num_states],
                num_states);
    m.initial_dist.resize(num_states);
    dirichlet_row(m.initial_dist.data(), num_states);
    m.reward.resize(static_cast<std::size_t>(num_states) * num_actions);
    for (double& v : m.reward) v = unif01(rng);

    m.constraint_costs.assign(num_constraints,
                              std::vector<double>(static_cast<std::size_t>(num_states) *
                                                  num_actions));
    if (num_constraints == 0) {
        m.validate();
        return m;
    }

    for (int attempt = 0; attempt < max_retries; ++attempt) {
        for (auto& table : m.constraint_costs)
            for (double& v : table) v = unif11(rng);
        if (slater_margin(m) >= slater_margin_target) {
            m.validate();
            return m;
        }
    }
    std::ostringstream os;
    os << "random_cmdp: could not certify Slater margin >= " << slater_margin_target << " after "
       << max_retries << " attempts (seed " << seed << ")";
    throw std::runtime_error(os.str());
}

}  // namespace cspda
