#pragma once

#include <vector>

#include "cspda/types.hpp"

namespace cspda {

enum class LpStatus { optimal, infeasible, unbounded };

const char* to_string(LpStatus status);

/// Dense two-phase primal simplex with Bland's anti-cycling rule.
/// Solves  min c'x  s.t.  Ax = b, x >= 0  (b may have any sign; rows are
/// normalized internally). Row prices y (with c_j - y'A_j >= 0 at the
/// optimum) are recovered from the phase-1 artificial columns. Problem
/// sizes here are tiny, so everything is kept dense and deterministic.
class DenseSimplex {
public:
    struct Result {
        LpStatus status = LpStatus::infeasible;
        double objective = 0.0;
        std::vector<double> x;
        std::vector<double> y;  // one price per input row
    };

    static Result solve(const std::vector<std::vector<double>>& a, const std::vector<double>& b,
                        const std::vector<double>& c);
};

/// Ground-truth solution of the (conservative) occupancy-measure LP:
///   max <lambda, r>   s.t.  <lambda, g_i> >= kappa  for all i,
///                           sum_a (I - gamma P_a^T) lambda_a = (1-gamma) rho,
///                           lambda >= 0.
/// Duals follow the Lagrangian sign convention used by the solver:
/// dual_u >= 0 multiplies (G^T lambda - kappa 1), dual_v multiplies the
/// flow constraint through (1-gamma)<rho,v> + sum_a <lambda_a,(gamma P_a - I) v>.
struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    OccupancyMeasure lambda_star;
    double objective = 0.0;
    std::vector<double> dual_u;
    std::vector<double> dual_v;
};

LpSolution solve_cmdp_lp(const CmdpModel& model, double kappa);

/// KKT residuals of a candidate LP solution (all ~0 at a true optimum):
/// primal feasibility, dual feasibility (stationarity as inequality),
/// complementary slackness for both lambda and u, and the duality gap.
struct KktReport {
    double primal_flow_residual = 0.0;       // l1 norm of flow violation
    double primal_ineq_violation = 0.0;      // max_i max(0, kappa - <lambda, g_i>)
    double primal_negativity = 0.0;          // max(0, -min lambda)
    double dual_negativity = 0.0;            // max(0, -min u)
    double stationarity_violation = 0.0;     // max_sa max(0, r + u'g - (I-gamma P_a)v)
    double complementary_lambda = 0.0;       // max_sa lambda * |stationarity slack|
    double complementary_u = 0.0;            // max_i |u_i (<lambda,g_i> - kappa)|
    double duality_gap = 0.0;                // |<lambda,r> - ((1-gamma)<rho,v> - kappa sum u)|
    double max_residual() const;
};

KktReport kkt_report(const CmdpModel& model, double kappa, const LpSolution& sol);

/// Maximal uniform Slater slack: max over flow-feasible lambda of
/// min_i <lambda, g_i>. Negative means no strictly feasible point exists.
/// Returns +infinity when the model has no constraints.
double slater_margin(const CmdpModel& model);

/// Objective loss caused by conservatively tightening the constraints:
/// gap = objective(kappa=0) - objective(kappa), bound = kappa / phi.
/// Requires kappa <= min(phi/2, 1) and phi <= slater_margin(model).
struct ConservativeGap {
    double gap = 0.0;
    double bound = 0.0;
};

ConservativeGap conservative_gap(const CmdpModel& model, double kappa, double phi);

}  // namespace cspda
