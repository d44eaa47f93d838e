#include "cspda/lp_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cspda/cmdp_core.hpp"

namespace cspda {

namespace {

constexpr double kPivotEps = 1e-9;

}  // namespace

const char* to_string(LpStatus status) {
    switch (status) {
        case LpStatus::optimal: return "optimal";
        case LpStatus::infeasible: return "infeasible";
        case LpStatus::unbounded: return "unbounded";
    }
    return "?";
}

DenseSimplex::Result DenseSimplex::solve(const std::vector<std::vector<double>>& a,
                                         const std::vector<double>& b,
                                         const std::vector<double>& c) {
    const int m = static_cast<int>(a.size());
    const int n = static_cast<int>(c.size());

    // Tableau: n structural columns, m artificial columns, rhs.
    // Artificial columns double as the record of B^{-1} for price recovery.
    const int total = n + m;
    std::vector<std::vector<double>> t(m, std::vector<double>(total + 1, 0.0));
    for (int i = 0; i < m; ++i) {
        const double sign = (b[i] < 0.0) ? -1.0 : 1.0;
        for (int j = 0; j < n; ++j) t[i][j] = sign * a[i][j];
        t[i][n + i] = 1.0;
        t[i][total] = sign * b[i];
    }

    std::vector<int> basis(m);
    for (int i = 0; i < m; ++i) basis[i] = n + i;
    std::vector<bool> row_active(m, true);

    auto pivot = [&](int row, int col) {
        const double piv = t[row][col];
        for (int j = 0; j <= total; ++j) t[row][j] /= piv;
        for (int i = 0; i < m; ++i) {
            if (i == row || !row_active[i]) continue;
            const double f = t[i][col];
            if (f == 0.0) continue;
            for (int j = 0; j <= total; ++j) t[i][j] -= f * t[row][j];
        }
        basis[row] = col;
    };

    // Runs Bland's rule to optimality for the cost vector `cost` over the
    // columns [0, limit). Returns false on unboundedness.
    auto run = [&](const std::vector<double>& cost, int limit) {
        while (true) {
            // Reduced costs via current prices: y_i implicit in rows.
            int enter = -1;
            for (int j = 0; j < limit; ++j) {
                bool in_basis = false;
                for (int i = 0; i < m; ++i)
                    if (row_active[i] && basis[i] == j) { in_basis = true; break; }
                if (in_basis) continue;
                double red = cost[j];
                for (int i = 0; i < m; ++i)
                    if (row_active[i]) red -= cost[basis[i]] * t[i][j];
                if (red < -kPivotEps) { enter = j; break; }  // Bland: smallest index
            }
            if (enter < 0) return true;

            int leave = -1;
            double best_ratio = 0.0;
            for (int i = 0; i < m; ++i) {
                if (!row_active[i] || t[i][enter] <= kPivotEps) continue;
                const double ratio = t[i][total] / t[i][enter];
                if (leave < 0 || ratio < best_ratio - 1e-15 ||
                    (std::abs(ratio - best_ratio) <= 1e-15 && basis[i] < basis[leave])) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
            if (leave < 0) return false;  // unbounded
            pivot(leave, enter);
        }
    };

    Result res;

    // Phase 1: minimize the sum of artificials (only structural columns
    // may enter).
    std::vector<double> phase1_cost(total, 0.0);
    for (int j = n; j < total; ++j) phase1_cost[j] = 1.0;
    run(phase1_cost, n);

    double phase1_obj = 0.0;
    for (int i = 0; i < m; ++i)
        if (row_active[i]) phase1_obj += phase1_cost[basis[i]] * t[i][total];
    if (phase1_obj > 1e-7) {
        res.status = LpStatus::infeasible;
        return res;
    }

    // Drive artificials out of the basis; an all-zero row is redundant and
    // gets dropped.
    for (int i = 0; i < m; ++i) {
        if (!row_active[i] || basis[i] < n) continue;
        int col = -1;
        for (int j = 0; j < n; ++j)
            if (std::abs(t[i][j]) > kPivotEps) { col = j; break; }
        if (col >= 0)
            pivot(i, col);
        else
            row_active[i] = false;
    }

    // Phase 2 over structural columns only.
    std::vector<double> phase2_cost(total, 0.0);
    for (int j = 0; j < n; ++j) phase2_cost[j] = c[j];
    if (!run(phase2_cost, n)) {
        res.status = LpStatus::unbounded;
        return res;
    }

    res.status = LpStatus::optimal;
    res.x.assign(n, 0.0);
    for (int i = 0; i < m; ++i)
        if (row_active[i] && basis[i] < n) res.x[basis[i]] = t[i][total];
    res.objective = 0.0;
    for (int j = 0; j < n; ++j) res.objective += c[j] * res.x[j];

    // Prices: y = c_B' B^{-1}; B^{-1} sits in the artificial columns, up to
    // the sign flips applied to rows with negative rhs. Dropped rows price 0.
    res.y.assign(m, 0.0);
    for (int k = 0; k < m; ++k) {
        double yk = 0.0;
        for (int i = 0; i < m; ++i)
            if (row_active[i]) yk += phase2_cost[basis[i]] * t[i][n + k];
        res.y[k] = (b[k] < 0.0) ? -yk : yk;
    }
    return res;
}

LpSolution solve_cmdp_lp(const CmdpModel& model, double kappa) {
    if (kappa < 0.0) throw std::invalid_argument("solve_cmdp_lp: kappa must be >= 0");
    const int S = model.num_states;
    const int A = model.num_actions;
    const int I = model.num_constraints;
    const int n_lambda = S * A;
    const int n = n_lambda + I;  // lambda + surplus for each inequality
    const int m = S + I;

    std::vector<std::vector<double>> a(m, std::vector<double>(n, 0.0));
    std::vector<double> b(m, 0.0);
    std::vector<double> c(n, 0.0);

    // Flow rows: sum_a lambda(s,a) - gamma sum_{s',a} P_a(s',s) lambda(s',a)
    //            = (1-gamma) rho(s)
    for (int s = 0; s < S; ++s) {
        for (int a2 = 0; a2 < A; ++a2) a[s][s * A + a2] += 1.0;
        for (int sp = 0; sp < S; ++sp)
            for (int a2 = 0; a2 < A; ++a2)
                a[s][sp * A + a2] -= model.discount * model.p(a2, sp, s);
        b[s] = (1.0 - model.discount) * model.initial_dist[s];
    }
    // Constraint rows: <g_i, lambda> - surplus_i = kappa
    for (int i = 0; i < I; ++i) {
        for (int k = 0; k < n_lambda; ++k) a[S + i][k] = model.constraint_costs[i][k];
        a[S + i][n_lambda + i] = -1.0;
        b[S + i] = kappa;
    }
    for (int k = 0; k < n_lambda; ++k) c[k] = -model.reward[k];

    const auto res = DenseSimplex::solve(a, b, c);
    LpSolution sol;
    sol.status = res.status;
    if (res.status != LpStatus::optimal) return sol;

    sol.lambda_star.num_states = S;
    sol.lambda_star.num_actions = A;
    sol.lambda_star.lambda.assign(res.x.begin(), res.x.begin() + n_lambda);
    for (double& v : sol.lambda_star.lambda) v = std::max(0.0, v);
    sol.objective = -res.objective;
    // Price-to-Lagrangian mapping: u = y on inequality rows, v = -y on flow rows.
    sol.dual_v.resize(S);
    for (int s = 0; s < S; ++s) sol.dual_v[s] = -res.y[s];
    sol.dual_u.resize(I);
    for (int i = 0; i < I; ++i) sol.dual_u[i] = std::max(0.0, res.y[S + i]);
    return sol;
}

double KktReport::max_residual() const {
    return std::max({primal_flow_residual, primal_ineq_violation, primal_negativity,
                     dual_negativity, stationarity_violation, complementary_lambda,
                     complementary_u, duality_gap});
}

KktReport kkt_report(const CmdpModel& model, double kappa, const LpSolution& sol) {
    const int S = model.num_states;
    const int A = model.num_actions;
    const int I = model.num_constraints;
    KktReport rep;
    if (sol.status != LpStatus::optimal) {
        rep.duality_gap = std::numeric_limits<double>::infinity();
        return rep;
    }
    const auto& lam = sol.lambda_star;

    rep.primal_flow_residual = flow_residual(model, lam);
    for (int i = 0; i < I; ++i) {
        const double gi = sa_dot(lam, model.constraint_costs[i]);
        rep.primal_ineq_violation = std::max(rep.primal_ineq_violation, kappa - gi);
        rep.complementary_u = std::max(rep.complementary_u, std::abs(sol.dual_u[i] * (gi - kappa)));
        rep.dual_negativity = std::max(rep.dual_negativity, -sol.dual_u[i]);
    }
    rep.primal_ineq_violation = std::max(0.0, rep.primal_ineq_violation);
    rep.dual_negativity = std::max(0.0, rep.dual_negativity);
    for (double v : lam.lambda) rep.primal_negativity = std::max(rep.primal_negativity, -v);

    // Stationarity: r(s,a) + sum_i u_i g_i(s,a) - [(I - gamma P_a) v](s) <= 0,
    // with equality wherever lambda(s,a) > 0.
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            double slack = model.r(s, a);
            for (int i = 0; i < I; ++i) slack += sol.dual_u[i] * model.g(i, s, a);
            double pv = 0.0;
            for (int s2 = 0; s2 < S; ++s2) pv += model.p(a, s, s2) * sol.dual_v[s2];
            slack -= sol.dual_v[s] - model.discount * pv;
            rep.stationarity_violation = std::max(rep.stationarity_violation, slack);
            rep.complementary_lambda =
                std::max(rep.complementary_lambda, lam.at(s, a) * std::abs(slack));
        }
    }
    rep.stationarity_violation = std::max(0.0, rep.stationarity_violation);

    double dual_obj = 0.0;
    for (int s = 0; s < S; ++s)
        dual_obj += (1.0 - model.discount) * model.initial_dist[s] * sol.dual_v[s];
    for (int i = 0; i < I; ++i) dual_obj -= kappa * sol.dual_u[i];
    rep.duality_gap = std::abs(sol.objective - dual_obj);
    return rep;
}

double slater_margin(const CmdpModel& model) {
    const int S = model.num_states;
    const int A = model.num_actions;
    const int I = model.num_constraints;
    if (I == 0) return std::numeric_limits<double>::infinity();

    // max tau  s.t. flow(lambda) = (1-gamma) rho, <g_i,lambda> - tau >= 0.
    // Variables: lambda (SA), tau+ , tau-, surplus (I).
    const int n_lambda = S * A;
    const int n = n_lambda + 2 + I;
    const int m = S + I;
    std::vector<std::vector<double>> a(m, std::vector<double>(n, 0.0));
    std::vector<double> b(m, 0.0);
    std::vector<double> c(n, 0.0);

    for (int s = 0; s < S; ++s) {
        for (int a2 = 0; a2 < A; ++a2) a[s][s * A + a2] += 1.0;
        for (int sp = 0; sp < S; ++sp)
            for (int a2 = 0; a2 < A; ++a2)
                a[s][sp * A + a2] -= model.discount * model.p(a2, sp, s);
        b[s] = (1.0 - model.discount) * model.initial_dist[s];
    }
    for (int i = 0; i < I; ++i) {
        for (int k = 0; k < n_lambda; ++k) a[S + i][k] = model.constraint_costs[i][k];
        a[S + i][n_lambda] = -1.0;      // tau+
        a[S + i][n_lambda + 1] = 1.0;   // tau-
        a[S + i][n_lambda + 2 + i] = -1.0;
        b[S + i] = 0.0;
    }
    c[n_lambda] = -1.0;
    c[n_lambda + 1] = 1.0;

    const auto res = DenseSimplex::solve(a, b, c);
    if (res.status != LpStatus::optimal)
        throw std::runtime_error("slater_margin: LP did not solve to optimality");
    return -res.objective;
}

ConservativeGap conservative_gap(const CmdpModel& model, double kappa, double phi) {
    if (!(phi > 0.0)) throw std::invalid_argument("conservative_gap: phi must be positive");
    if (kappa > std::min(phi / 2.0, 1.0) + 1e-12)
        throw std::invalid_argument("conservative_gap: requires kappa <= min(phi/2, 1)");
    const double margin = slater_margin(model);
    if (phi > margin + 1e-9)
        throw std::invalid_argument("conservative_gap: phi exceeds the model's Slater margin");

    const auto base = solve_cmdp_lp(model, 0.0);
    const auto tightened = solve_cmdp_lp(model, kappa);
    if (base.status != LpStatus::optimal || tightened.status != LpStatus::optimal)
        throw std::runtime_error("conservative_gap: LP solve failed");

    ConservativeGap out;
    out.gap = base.objective - tightened.objective;
    out.bound = kappa / phi;
    if (out.gap < -1e-8 || out.gap > out.bound + 1e-8)
        throw std::runtime_error("conservative_gap: gap outside [0, kappa/phi] certificate");
    return out;
}

}  // namespace cspda
