#pragma once

#include <utility>
#include <vector>

#include "cspda/types.hpp"

namespace cspda {

/// Dual variables: u multiplies the tightened inequality constraints
/// (u >= 0, ||u||_1 <= u_radius), v multiplies the flow constraints
/// (||v||_inf <= v_radius).
struct DualVars {
    std::vector<double> u;
    std::vector<double> v;
    double u_radius = 0.0;
    double v_radius = 0.0;

    static DualVars zeros(int num_constraints, int num_states, double u_radius, double v_radius);
    bool in_bounds(double tol = 1e-9) const;
};

/// One generative-model interaction: (s,a) drawn from the sampling
/// distribution, s_next from the model, s0 from the initial distribution,
/// plus the revealed reward and constraint costs at (s,a).
struct SampleTransition {
    int s = 0;
    int a = 0;
    int s_next = 0;
    int s0 = 0;
    double reward = 0.0;
    std::vector<double> costs;
};

/// Conservative Lagrangian
///   L(lambda,u,v) = <lambda,r> + <u, G^T lambda - kappa 1>
///                   + (1-gamma)<rho,v> + sum_a <lambda_a, (gamma P_a - I) v>.
double exact_lagrangian(const CmdpModel& model, const OccupancyMeasure& lambda,
                        const DualVars& duals, double kappa);

/// Exact dual gradients:
///   grad_u = G^T lambda - kappa 1
///   grad_v = (1-gamma) rho + sum_a (gamma P_a^T - I) lambda_a
std::pair<std::vector<double>, std::vector<double>> exact_gradients(const CmdpModel& model,
                                                                    const OccupancyMeasure& lambda,
                                                                    const DualVars& duals,
                                                                    double kappa);

/// Exact primal gradient, entrywise
///   grad_lambda(s,a) = r(s,a) + sum_i u_i g_i(s,a) + [(gamma P_a - I) v](s).
std::vector<double> exact_lambda_gradient(const CmdpModel& model, const DualVars& duals);

/// Z_sa = r(s,a) + gamma v(s') - v(s) + sum_i u_i g_i(s,a).
double z_value(const SampleTransition& sample, const DualVars& duals, double gamma);

/// One-sample primal gradient estimate: a single nonzero
/// (Z_sa - M) / zeta(s,a) at (s,a). With the scheduled M and duals inside
/// their balls the entry is nonpositive.
struct LambdaGradEntry {
    int s = 0;
    int a = 0;
    double value = 0.0;
};

LambdaGradEntry stoch_grad_lambda(const SampleTransition& sample, double zeta_value,
                                  const DualVars& duals, double gamma, double shift_m);

/// One-sample u-gradient estimate: lambda(s,a) g(s,a) / zeta(s,a) - kappa 1.
std::vector<double> stoch_grad_u(const SampleTransition& sample, double zeta_value,
                                 double lambda_value, double kappa);

/// One-sample v-gradient estimate, at most three nonzeros:
/// (1-gamma) at s0, + lambda/zeta * gamma at s', - lambda/zeta at s.
/// Coinciding indices are summed into one entry.
std::vector<std::pair<int, double>> stoch_grad_v(const SampleTransition& sample, double zeta_value,
                                                 double lambda_value, double gamma);

/// Sampled Lagrangian
///   (1-gamma) v(s0) + lambda(s,a) (Z_sa - M) / zeta(s,a) - kappa sum_i u_i.
/// Its expectation over (s,a) ~ zeta, s' ~ P, s0 ~ rho is L - M (the
/// constant offset comes from sum_{s,a} lambda = 1).
double sampled_lagrangian(const SampleTransition& sample, double zeta_value, double lambda_value,
                          const DualVars& duals, double gamma, double shift_m, double kappa);

}  // namespace cspda
