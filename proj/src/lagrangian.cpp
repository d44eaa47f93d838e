#include "cspda/lagrangian.hpp"

#include <cmath>
#include <stdexcept>

namespace cspda {

DualVars DualVars::zeros(int num_constraints, int num_states, double u_radius, double v_radius) {
    DualVars d;
    d.u.assign(num_constraints, 0.0);
    d.v.assign(num_states, 0.0);
    d.u_radius = u_radius;
    d.v_radius = v_radius;
    return d;
}

bool DualVars::in_bounds(double tol) const {
    double u1 = 0.0;
    for (double x : u) {
        if (x < -tol) return false;
        u1 += x;
    }
    if (u1 > u_radius + tol) return false;
    for (double x : v)
        if (std::abs(x) > v_radius + tol) return false;
    return true;
}

double exact_lagrangian(const CmdpModel& model, const OccupancyMeasure& lambda,
                        const DualVars& duals, double kappa) {
    const int S = model.num_states;
    const int A = model.num_actions;
    const int I = model.num_constraints;

    double value = 0.0;
    for (int k = 0; k < S * A; ++k) value += lambda.lambda[k] * model.reward[k];
    for (int i = 0; i < I; ++i) {
        double gi = 0.0;
        for (int k = 0; k < S * A; ++k) gi += lambda.lambda[k] * model.constraint_costs[i][k];
        value += duals.u[i] * (gi - kappa);
    }
    for (int s = 0; s < S; ++s)
        value += (1.0 - model.discount) * model.initial_dist[s] * duals.v[s];
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            const double l = lambda.at(s, a);
            if (l == 0.0) continue;
            double pv = 0.0;
            for (int s2 = 0; s2 < S; ++s2) pv += model.p(a, s, s2) * duals.v[s2];
            value += l * (model.discount * pv - duals.v[s]);
        }
    }
    return value;
}

std::pair<std::vector<double>, std::vector<double>> exact_gradients(const CmdpModel& model,
                                                                    const OccupancyMeasure& lambda,
                                                                    const DualVars& duals,
                                                                    double kappa) {
    (void)duals;  // L is linear in the duals; gradients depend on lambda only
    const int S = model.num_states;
    const int A = model.num_actions;
    const int I = model.num_constraints;

    std::vector<double> grad_u(I, 0.0);
    for (int i = 0; i < I; ++i) {
        double gi = 0.0;
        for (int k = 0; k < S * A; ++k) gi += lambda.lambda[k] * model.constraint_costs[i][k];
        grad_u[i] = gi - kappa;
    }

    std::vector<double> grad_v(S, 0.0);
    for (int s = 0; s < S; ++s) grad_v[s] = (1.0 - model.discount) * model.initial_dist[s];
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            const double l = lambda.at(s, a);
            if (l == 0.0) continue;
            grad_v[s] -= l;
            for (int s2 = 0; s2 < S; ++s2) grad_v[s2] += model.discount * model.p(a, s, s2) * l;
        }
    }
    return {std::move(grad_u), std::move(grad_v)};
}

std::vector<double> exact_lambda_gradient(const CmdpModel& model, const DualVars& duals) {
    const int S = model.num_states;
    const int A = model.num_actions;
    const int I = model.num_constraints;
    std::vector<double> grad(static_cast<std::size_t>(S) * A, 0.0);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            double g = model.r(s, a);
            for (int i = 0; i < I; ++i) g += duals.u[i] * model.g(i, s, a);
            double pv = 0.0;
            for (int s2 = 0; s2 < S; ++s2) pv += model.p(a, s, s2) * duals.v[s2];
            g += model.discount * pv - duals.v[s];
            grad[static_cast<std::size_t>(s) * A + a] = g;
        }
    }
    return grad;
}

double z_value(const SampleTransition& sample, const DualVars& duals, double gamma) {
    double z = sample.reward + gamma * duals.v[sample.s_next] - duals.v[sample.s];
    for (std::size_t i = 0; i < duals.u.size(); ++i) z += duals.u[i] * sample.costs[i];
    return z;
}

namespace {

void require_support(double zeta_value, const char* who) {
    if (!(zeta_value > 0.0))
        throw std::invalid_argument(std::string(who) + ": zeta(s,a) must be positive");
}

}  // namespace

LambdaGradEntry stoch_grad_lambda(const SampleTransition& sample, double zeta_value,
                                  const DualVars& duals, double gamma, double shift_m) {
    require_support(zeta_value, "stoch_grad_lambda");
    LambdaGradEntry entry;
    entry.s = sample.s;
    entry.a = sample.a;
    entry.value = (z_value(sample, duals, gamma) - shift_m) / zeta_value;
    return entry;
}

std::vector<double> stoch_grad_u(const SampleTransition& sample, double zeta_value,
                                 double lambda_value, double kappa) {
    require_support(zeta_value, "stoch_grad_u");
    const double w = lambda_value / zeta_value;
    std::vector<double> grad(sample.costs.size());
    for (std::size_t i = 0; i < sample.costs.size(); ++i) grad[i] = w * sample.costs[i] - kappa;
    return grad;
}

std::vector<std::pair<int, double>> stoch_grad_v(const SampleTransition& sample, double zeta_value,
                                                 double lambda_value, double gamma) {
    require_support(zeta_value, "stoch_grad_v");
    const double w = lambda_value / zeta_value;
    std::vector<std::pair<int, double>> entries;
    entries.reserve(3);
    auto add = [&](int idx, double val) {
        for (auto& [k, v] : entries) {
            if (k == idx) {
                v += val;
                return;
            }
        }
        entries.emplace_back(idx, val);
    };
    add(sample.s0, 1.0 - gamma);
    add(sample.s_next, w * gamma);
    add(sample.s, -w);
    return entries;
}

double sampled_lagrangian(const SampleTransition& sample, double zeta_value, double lambda_value,
                          const DualVars& duals, double gamma, double shift_m, double kappa) {
    require_support(zeta_value, "sampled_lagrangian");
    double value = (1.0 - gamma) * duals.v[sample.s0];
    value += lambda_value * (z_value(sample, duals, gamma) - shift_m) / zeta_value;
    for (double ui : duals.u) value -= kappa * ui;
    return value;
}

}  // namespace cspda
