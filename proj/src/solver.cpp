#include "cspda/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "cspda/cmdp_core.hpp"

namespace cspda {

namespace {

constexpr double kMaxMirrorExponent = 50.0;

struct Kahan {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

/// Flat binary sum tree over nonnegative weights, for O(log n) categorical
/// sampling with O(log n) single-coordinate updates.
class SumTree {
public:
    explicit SumTree(int n) : n_(n) {
        cap_ = 1;
        while (cap_ < n_) cap_ <<= 1;
        node_.assign(2 * cap_, 0.0);
    }

    void rebuild(const std::vector<double>& w) {
        std::fill(node_.begin(), node_.end(), 0.0);
        for (int i = 0; i < n_; ++i) node_[cap_ + i] = w[i];
        for (int i = cap_ - 1; i >= 1; --i) node_[i] = node_[2 * i] + node_[2 * i + 1];
    }

    void set(int i, double w) {
        int k = cap_ + i;
        node_[k] = w;
        for (k >>= 1; k >= 1; k >>= 1) node_[k] = node_[2 * k] + node_[2 * k + 1];
    }

    double total() const { return node_[1]; }

    int sample(double u) const {
        int k = 1;
        while (k < cap_) {
            const double left = node_[2 * k];
            if (u < left) {
                k = 2 * k;
            } else {
                u -= left;
                k = 2 * k + 1;
            }
        }
        return std::min(k - cap_, n_ - 1);
    }

private:
    int n_;
    int cap_;
    std::vector<double> node_;
};

/// Primal iterate of the mirror ascent, stored as log-weights lw with a
/// running log-normalizer, plus the machinery for exact O(1)-amortized
/// iterate averaging: between touches of a coordinate, its probability
/// only changes through the common normalizer, so sum_t lambda_i^t
/// telescopes into exp(lw_i) * sum_t exp(-log_norm_t).
class MirrorState {
public:
    explicit MirrorState(int n)
        : n_(n),
          lw_(n, -std::log(static_cast<double>(n))),
          tree_(n),
          avg_sum_(n),
          last_s_(n, 0.0) {
        rebuild();
    }

    double prob(int i) const { return std::exp(lw_[i] - log_norm_); }

    void snapshot(std::vector<double>& out) const {
        out.resize(n_);
        for (int i = 0; i < n_; ++i) out[i] = prob(i);
    }

    /// Accumulates the current iterate into the running sums.
    void stamp() {
        s_inv_.add(std::exp(-log_norm_));
    }

    /// Multiplies coordinate i's weight by exp(arg) and renormalizes lazily.
    void update(int i, double arg) {
        flush(i);
        const double lam = prob(i);
        lw_[i] += arg;
        const double growth = lam * std::expm1(arg);
        if (growth <= -0.999999999) {
            rebuild();  // essentially all mass wiped; recompute the normalizer exactly
            return;
        }
        log_norm_ += std::log1p(growth);
        tree_.set(i, std::exp(lw_[i]));
        if (++since_rebuild_ >= n_ || std::abs(log_norm_) > 60.0) rebuild();
    }

    /// Sum of all stamped iterates so far (copied out; does not reset).
    void average_sums(std::vector<double>& out) const {
        out.resize(n_);
        for (int i = 0; i < n_; ++i)
            out[i] = avg_sum_[i].sum + std::exp(lw_[i]) * (s_inv_.sum - last_s_[i]);
    }

    const SumTree& tree() const { return tree_; }

private:
    void flush(int i) {
        avg_sum_[i].add(std::exp(lw_[i]) * (s_inv_.sum - last_s_[i]));
        last_s_[i] = s_inv_.sum;
    }

    void rebuild() {
        std::vector<double> w(n_);
        double max_lw = *std::max_element(lw_.begin(), lw_.end());
        double total = 0.0;
        for (int i = 0; i < n_; ++i) total += std::exp(lw_[i] - max_lw);
        const double lse = max_lw + std::log(total);
        for (int i = 0; i < n_; ++i) {
            flush(i);
            lw_[i] -= lse;
            w[i] = std::exp(lw_[i]);
            last_s_[i] = 0.0;
        }
        s_inv_ = Kahan{};
        log_norm_ = 0.0;
        tree_.rebuild(w);
        since_rebuild_ = 0;
    }

    int n_;
    std::vector<double> lw_;
    double log_norm_ = 0.0;
    SumTree tree_;
    int since_rebuild_ = 0;
    std::vector<Kahan> avg_sum_;
    std::vector<double> last_s_;
    Kahan s_inv_;
};

double dot(const std::vector<double>& x, const std::vector<double>& y) {
    double acc = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) acc += x[k] * y[k];
    return acc;
}

double norm1(const std::vector<double>& x) {
    double acc = 0.0;
    for (double v : x) acc += std::abs(v);
    return acc;
}

double norm_inf(const std::vector<double>& x) {
    double acc = 0.0;
    for (double v : x) acc = std::max(acc, std::abs(v));
    return acc;
}

}  // namespace

void SolverConfig::validate() const {
    if (iterations < 1) throw std::invalid_argument("SolverConfig: T must be >= 1");
    if (!(delta > 0.0 && delta < 0.5))
        throw std::invalid_argument("SolverConfig: delta must lie in (0, 1/2)");
    if (!(phi > 0.0)) throw std::invalid_argument("SolverConfig: phi must be positive");
    if (kappa < 0.0) throw std::invalid_argument("SolverConfig: kappa must be >= 0");
    if (!(alpha > 0.0 && beta > 0.0))
        throw std::invalid_argument("SolverConfig: step sizes must be positive");
    if (!(u_radius > 0.0 && v_radius > 0.0))
        throw std::invalid_argument("SolverConfig: dual radii must be positive");
    if (log_every < 1) throw std::invalid_argument("SolverConfig: log_every must be >= 1");
}

SolverConfig derive_schedule(const CmdpModel& model, double phi, double c_tilde1, std::int64_t T,
                             double g_max) {
    if (!(phi > 0.0)) throw std::invalid_argument("derive_schedule: phi must be positive");
    if (c_tilde1 < 0.0) throw std::invalid_argument("derive_schedule: c_tilde1 must be >= 0");
    if (T < 1) throw std::invalid_argument("derive_schedule: T must be >= 1");
    if (!(g_max > 0.0)) throw std::invalid_argument("derive_schedule: g_max must be positive");

    const double gamma = model.discount;
    const double n = static_cast<double>(model.num_pairs());
    const double log_n = std::log(n);
    const double I = static_cast<double>(model.num_constraints);

    SolverConfig cfg;
    cfg.iterations = T;
    cfg.phi = phi;
    cfg.c_tilde1 = c_tilde1;

    cfg.kappa = (model.num_constraints == 0)
                    ? 0.0
                    : (2.0 * c_tilde1 / (1.0 - gamma)) *
                          std::sqrt(I * n * log_n / static_cast<double>(T));
    const double kappa_cap = std::min(phi / 2.0, 1.0);
    if (cfg.kappa > kappa_cap) {
        // kappa <= min(phi/2, 1) requires T >= max(16, 4 phi^2) * c1^2 I n log n
        //                                     / ((1-gamma)^2 phi^2)
        const double t_min = std::ceil(std::max(16.0, 4.0 * phi * phi) * c_tilde1 * c_tilde1 * I *
                                       n * log_n / ((1.0 - gamma) * (1.0 - gamma) * phi * phi));
        std::ostringstream os;
        os << "derive_schedule: T = " << T << " is below the admissible threshold; "
           << "kappa = " << cfg.kappa << " would exceed min(phi/2, 1) = " << kappa_cap
           << ". Minimal T for this configuration is " << static_cast<std::int64_t>(t_min) << ".";
        throw std::invalid_argument(os.str());
    }

    cfg.shift_m = 4.0 * (g_max / phi + 1.0 / (1.0 - gamma) +
                         2.0 * g_max / ((1.0 - gamma) * phi));
    const double i_eff = std::max(I, 1.0);
    cfg.alpha = std::sqrt(static_cast<double>(model.num_states)) /
                ((1.0 - gamma) * phi * std::sqrt(static_cast<double>(T) * i_eff));
    cfg.beta = (1.0 - gamma) * phi * std::sqrt(log_n / (static_cast<double>(T) * n));
    cfg.u_radius = 4.0 / phi;
    cfg.v_radius = 2.0 * (1.0 / (1.0 - gamma) + 2.0 * g_max / ((1.0 - gamma) * phi));
    return cfg;
}

std::vector<double> project_u(std::vector<double> u, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("project_u: radius must be positive");
    double pos_sum = 0.0;
    for (double& x : u) {
        if (x < 0.0) x = 0.0;  // clipping first matches (y - theta)+ with theta = 0
        pos_sum += x;
    }
    if (pos_sum <= radius) return u;

    // Find theta > 0 with sum(max(u_i - theta, 0)) = radius.
    std::vector<double> sorted(u);
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double prefix = 0.0;
    double theta = 0.0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        prefix += sorted[k];
        const double cand = (prefix - radius) / static_cast<double>(k + 1);
        if (k + 1 == sorted.size() || sorted[k + 1] <= cand) {
            theta = cand;
            break;
        }
    }
    for (double& x : u) x = std::max(0.0, x - theta);
    return u;
}

std::vector<double> project_v(std::vector<double> v, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("project_v: radius must be positive");
    for (double& x : v) x = std::clamp(x, -radius, radius);
    return v;
}

OccupancyMeasure mirror_step(const OccupancyMeasure& lambda, double grad_entry, int s, int a,
                             double beta) {
    if (grad_entry > 0.0) {
        static std::atomic<bool> warned{false};
        if (!warned.exchange(true))
            std::cerr << "[cspda] warning: positive mirror-ascent gradient entry (" << grad_entry
                      << "); shift parameter M is likely misconfigured\n";
    }
    const double arg = std::min(beta * grad_entry, kMaxMirrorExponent);
    OccupancyMeasure next = lambda;
    next.at(s, a) *= std::exp(arg);
    double total = 0.0;
    for (double v : next.lambda) total += v;
    for (double& v : next.lambda) v /= total;
    return next;
}

SolverResult run(const CmdpModel& model, const GenerativeModel& env, const SolverConfig& config,
                 const LogObserver& observer) {
    model.validate();
    config.validate();
    if (env.num_states() != model.num_states || env.num_actions() != model.num_actions ||
        env.num_constraints() != model.num_constraints)
        throw std::invalid_argument("run: generative model dimensions do not match the CMDP");

    const int S = model.num_states;
    const int A = model.num_actions;
    const int I = model.num_constraints;
    const int n = S * A;
    const double gamma = model.discount;
    const double delta = config.delta;
    const double uniform_part = delta / static_cast<double>(n);
    const std::int64_t T = config.iterations;

    Rng rng(config.seed);
    std::uniform_real_distribution<double> unif01(0.0, 1.0);
    std::uniform_int_distribution<int> unif_pair(0, n - 1);

    MirrorState mirror(n);
    DualVars duals = DualVars::zeros(I, S, config.u_radius, config.v_radius);

    std::vector<Kahan> u_sum(I);
    std::vector<Kahan> v_sum(S);
    std::vector<std::int64_t> v_last_t(S, 0);
    auto flush_v = [&](int s, std::int64_t t) {
        v_sum[s].add(duals.v[s] * static_cast<double>(t - v_last_t[s]));
        v_last_t[s] = t;
    };

    SolverResult result;
    SampleTransition sample;
    sample.costs.resize(I);
    std::vector<double> lambda_snapshot, avg_snapshot;

    auto log_row = [&](std::int64_t t) {
        IterateRow row;
        row.t = t;
        mirror.snapshot(lambda_snapshot);
        OccupancyMeasure cur{S, A, lambda_snapshot};
        row.objective = dot(lambda_snapshot, model.reward);
        row.constraint_values.resize(I);
        for (int i = 0; i < I; ++i)
            row.constraint_values[i] = dot(lambda_snapshot, model.constraint_costs[i]);
        row.flow_res = flow_residual(model, cur);
        row.u_norm1 = norm1(duals.u);
        row.v_norm_inf = norm_inf(duals.v);

        mirror.average_sums(avg_snapshot);
        const double inv_t = 1.0 / static_cast<double>(t);
        for (double& v : avg_snapshot) v *= inv_t;
        OccupancyMeasure avg{S, A, avg_snapshot};
        row.avg_objective = dot(avg_snapshot, model.reward);
        row.avg_constraint_values.resize(I);
        for (int i = 0; i < I; ++i)
            row.avg_constraint_values[i] = dot(avg_snapshot, model.constraint_costs[i]);
        row.avg_flow_res = flow_residual(model, avg);
        double au = 0.0;
        for (int i = 0; i < I; ++i) au += std::abs(u_sum[i].sum * inv_t);
        row.avg_u_norm1 = au;
        double av = 0.0;
        for (int s = 0; s < S; ++s)
            av = std::max(av, std::abs((v_sum[s].sum +
                                        duals.v[s] * static_cast<double>(t - v_last_t[s])) *
                                       inv_t));
        row.avg_v_norm_inf = av;

        if (!std::isfinite(row.objective) || !std::isfinite(row.u_norm1) ||
            !std::isfinite(row.v_norm_inf)) {
            std::ostringstream os;
            os << "solver: non-finite iterate detected at t = " << t;
            throw std::runtime_error(os.str());
        }
        if (config.check_invariants) {
            cur.validate();
            avg.validate();
            if (!duals.in_bounds()) {
                std::ostringstream os;
                os << "solver: dual iterate left U x V at t = " << t;
                throw std::runtime_error(os.str());
            }
        }
        if (observer) observer(row, avg);
        result.log.rows.push_back(std::move(row));
    };

    std::vector<double> grad_u(I);
    for (std::int64_t t = 1; t <= T; ++t) {
        // Accumulate iterate t into the running sums.
        mirror.stamp();
        for (int i = 0; i < I; ++i) u_sum[i].add(duals.u[i]);

        if (t % config.log_every == 0 || t == T) log_row(t);

        // (s,a) ~ zeta^t: with probability 1-delta from lambda^t, else uniform.
        int idx;
        if (unif01(rng) < 1.0 - delta) {
            idx = mirror.tree().sample(unif01(rng) * mirror.tree().total());
        } else {
            idx = unif_pair(rng);
        }
        const int s = idx / A;
        const int a = idx % A;
        const double lambda_sa = mirror.prob(idx);
        const double zeta_sa = (1.0 - delta) * lambda_sa + uniform_part;

        sample.s = s;
        sample.a = a;
        sample.s0 = env.initial_sample(rng);
        sample.s_next = env.sample_next(s, a, rng);
        sample.reward = env.reward(s, a);
        for (int i = 0; i < I; ++i) sample.costs[i] = env.cost(i, s, a);

        // All three gradients are evaluated at (lambda^t, u^t, v^t).
        const double z = z_value(sample, duals, gamma);
        const double delta_entry = (z - config.shift_m) / zeta_sa;
        if (delta_entry > 0.0) ++result.positive_delta_count;
        if (!std::isfinite(delta_entry)) {
            std::ostringstream os;
            os << "solver: non-finite gradient at t = " << t;
            throw std::runtime_error(os.str());
        }

        const double w = lambda_sa / zeta_sa;
        for (int i = 0; i < I; ++i) grad_u[i] = w * sample.costs[i] - config.kappa;

        // Dual updates (projected gradient steps).
        if (I > 0) {
            for (int i = 0; i < I; ++i) duals.u[i] -= config.alpha * grad_u[i];
            duals.u = project_u(std::move(duals.u), config.u_radius);
        }
        const auto v_entries = stoch_grad_v(sample, zeta_sa, lambda_sa, gamma);
        for (const auto& [vs, vg] : v_entries) {
            flush_v(vs, t);
            duals.v[vs] = std::clamp(duals.v[vs] - config.alpha * vg, -config.v_radius,
                                     config.v_radius);
        }

        if (config.check_invariants && !duals.in_bounds()) {
            std::ostringstream os;
            os << "solver: dual iterate left U x V at t = " << t;
            throw std::runtime_error(os.str());
        }

        // Primal mirror-ascent step.
        mirror.update(idx, std::min(config.beta * delta_entry, kMaxMirrorExponent));
    }

    // Finalize averages.
    mirror.average_sums(avg_snapshot);
    const double inv_t = 1.0 / static_cast<double>(T);
    for (double& v : avg_snapshot) v *= inv_t;
    result.avg_lambda = OccupancyMeasure{S, A, avg_snapshot};

    result.avg_duals = DualVars::zeros(I, S, config.u_radius, config.v_radius);
    for (int i = 0; i < I; ++i) result.avg_duals.u[i] = u_sum[i].sum * inv_t;
    for (int s = 0; s < S; ++s) {
        flush_v(s, T);
        result.avg_duals.v[s] = v_sum[s].sum * inv_t;
    }
    return result;
}

}  // namespace cspda
