#include "cspda/cmdp_core.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace cspda {

Policy policy_from_occupancy(const OccupancyMeasure& lambda) {
    const int S = lambda.num_states;
    const int A = lambda.num_actions;
    Policy pi;
    pi.num_states = S;
    pi.num_actions = A;
    pi.pi.assign(static_cast<std::size_t>(S) * A, 0.0);
    for (int s = 0; s < S; ++s) {
        double marginal = 0.0;
        for (int a = 0; a < A; ++a) marginal += lambda.at(s, a);
        if (marginal > 0.0) {
            for (int a = 0; a < A; ++a) pi.at(s, a) = lambda.at(s, a) / marginal;
        } else {
            for (int a = 0; a < A; ++a) pi.at(s, a) = 1.0 / A;
        }
    }
    return pi;
}

OccupancyMeasure occupancy_from_policy(const CmdpModel& model, const Policy& pi) {
    const int S = model.num_states;
    const int A = model.num_actions;
    const int n = S * A;
    const double gamma = model.discount;

    // M = I - gamma P_pi^T with P_pi((s,a),(s',a')) = P_a(s,s') pi(a'|s').
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            const int col = s * A + a;
            for (int s2 = 0; s2 < S; ++s2) {
                const double trans = model.p(a, s, s2);
                if (trans == 0.0) continue;
                for (int a2 = 0; a2 < A; ++a2) {
                    m(s2 * A + a2, col) -= gamma * trans * pi.at(s2, a2);
                }
            }
        }
    }

    Eigen::VectorXd rhs(n);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
            rhs(s * A + a) = (1.0 - gamma) * model.initial_dist[s] * pi.at(s, a);

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    Eigen::VectorXd x = lu.solve(rhs);
    if (!x.allFinite()) throw std::runtime_error("occupancy_from_policy: linear solve failed");

    OccupancyMeasure lambda;
    lambda.num_states = S;
    lambda.num_actions = A;
    lambda.lambda.resize(n);
    for (int k = 0; k < n; ++k) lambda.lambda[k] = std::max(0.0, x(k));
    return lambda;
}

double flow_residual(const CmdpModel& model, const OccupancyMeasure& lambda) {
    const int S = model.num_states;
    const int A = model.num_actions;
    const double gamma = model.discount;
    std::vector<double> res(S, 0.0);
    for (int s = 0; s < S; ++s) res[s] = (1.0 - gamma) * model.initial_dist[s];
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            const double l = lambda.at(s, a);
            if (l == 0.0) continue;
            res[s] -= l;
            for (int s2 = 0; s2 < S; ++s2) res[s2] += gamma * model.p(a, s, s2) * l;
        }
    }
    double norm = 0.0;
    for (double v : res) norm += std::abs(v);
    return norm;
}

ValueReport evaluate_policy(const CmdpModel& model, const Policy& pi) {
    const OccupancyMeasure lambda = occupancy_from_policy(model, pi);
    ValueReport report;
    report.objective = sa_dot(lambda, model.reward);
    report.constraint_values.resize(model.num_constraints);
    for (int i = 0; i < model.num_constraints; ++i)
        report.constraint_values[i] = sa_dot(lambda, model.constraint_costs[i]);
    report.flow_residual = flow_residual(model, lambda);
    return report;
}

McEstimate mc_value_estimate(const CmdpModel& model, const Policy& pi, std::int64_t num_rollouts,
                             std::uint64_t rng_seed) {
    if (num_rollouts <= 0)
        throw std::invalid_argument("mc_value_estimate: num_rollouts must be positive");
    const int I = model.num_constraints;
    const double gamma = model.discount;

    Rng rng(rng_seed);
    std::discrete_distribution<int> rho(model.initial_dist.begin(), model.initial_dist.end());
    std::geometric_distribution<int> horizon(1.0 - gamma);  // failures before first success
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    auto sample_row = [&](const double* row, int n) {
        double u = unif(rng);
        double acc = 0.0;
        for (int k = 0; k < n; ++k) {
            acc += row[k];
            if (u <= acc) return k;
        }
        return n - 1;
    };

    double obj_sum = 0.0, obj_sq = 0.0;
    std::vector<double> c_sum(I, 0.0), c_sq(I, 0.0);
    std::vector<double> c_total(I);

    for (std::int64_t k = 0; k < num_rollouts; ++k) {
        int s = rho(rng);
        const int steps = horizon(rng) + 1;
        double r_total = 0.0;
        std::fill(c_total.begin(), c_total.end(), 0.0);
        for (int t = 0; t < steps; ++t) {
            const int a = sample_row(&pi.pi[static_cast<std::size_t>(s) * model.num_actions],
                                     model.num_actions);
            r_total += model.r(s, a);
            for (int i = 0; i < I; ++i) c_total[i] += model.g(i, s, a);
            s = sample_row(&model.transition[(static_cast<std::size_t>(a) * model.num_states + s) *
                                             model.num_states],
                           model.num_states);
        }
        obj_sum += r_total;
        obj_sq += r_total * r_total;
        for (int i = 0; i < I; ++i) {
            c_sum[i] += c_total[i];
            c_sq[i] += c_total[i] * c_total[i];
        }
    }

    const double n = static_cast<double>(num_rollouts);
    const double scale = 1.0 - gamma;
    auto finish = [&](double sum, double sq, double& mean, double& se) {
        const double m = sum / n;
        const double var = std::max(0.0, sq / n - m * m);
        mean = scale * m;
        se = scale * std::sqrt(var / n);
    };

    McEstimate est;
    est.num_rollouts = num_rollouts;
    finish(obj_sum, obj_sq, est.objective_mean, est.objective_stderr);
    est.constraint_means.resize(I);
    est.constraint_stderrs.resize(I);
    for (int i = 0; i < I; ++i)
        finish(c_sum[i], c_sq[i], est.constraint_means[i], est.constraint_stderrs[i]);
    return est;
}

double sa_dot(const OccupancyMeasure& lambda, const std::vector<double>& table) {
    double acc = 0.0;
    for (std::size_t k = 0; k < lambda.lambda.size(); ++k) acc += lambda.lambda[k] * table[k];
    return acc;
}

}  // namespace cspda
