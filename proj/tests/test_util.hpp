#pragma once

// Shared helpers for the test suites: deterministic random models/policies,
// a chi-square quantile approximation, and a hierarchical grid maximizer
// used as the independent oracle for the 3-atom mirror step.

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "cspda/types.hpp"

namespace test_util {

inline cspda::Policy random_positive_policy(int num_states, int num_actions, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.05, 1.0);
    cspda::Policy pi;
    pi.num_states = num_states;
    pi.num_actions = num_actions;
    pi.pi.resize(static_cast<std::size_t>(num_states) * num_actions);
    for (int s = 0; s < num_states; ++s) {
        double row = 0.0;
        for (int a = 0; a < num_actions; ++a) row += (pi.at(s, a) = unif(rng));
        for (int a = 0; a < num_actions; ++a) pi.at(s, a) /= row;
    }
    return pi;
}

inline cspda::OccupancyMeasure random_occupancy(int num_states, int num_actions,
                                                std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.01, 1.0);
    cspda::OccupancyMeasure m;
    m.num_states = num_states;
    m.num_actions = num_actions;
    m.lambda.resize(static_cast<std::size_t>(num_states) * num_actions);
    double total = 0.0;
    for (double& v : m.lambda) total += (v = unif(rng));
    for (double& v : m.lambda) v /= total;
    return m;
}

/// Wilson-Hilferty approximation of the chi-square quantile.
inline double chi_square_quantile(int df, double p) {
    // z for p = 1 - 1e-4 and friends via Acklam-style rational approximation
    // is overkill here; the tests only need a handful of upper quantiles.
    auto normal_quantile = [](double q) {
        // Beasley-Springer-Moro
        static const double a[] = {2.50662823884, -18.61500062529, 41.39119773534,
                                   -25.44106049637};
        static const double b[] = {-8.47351093090, 23.08336743743, -21.06224101826,
                                   3.13082909833};
        static const double c[] = {0.3374754822726147, 0.9761690190917186, 0.1607979714918209,
                                   0.0276438810333863, 0.0038405729373609, 0.0003951896511919,
                                   0.0000321767881768, 0.0000002888167364, 0.0000003960315187};
        const double y = q - 0.5;
        if (std::abs(y) < 0.42) {
            const double r = y * y;
            return y * (((a[3] * r + a[2]) * r + a[1]) * r + a[0]) /
                   ((((b[3] * r + b[2]) * r + b[1]) * r + b[0]) * r + 1.0);
        }
        double r = q > 0.5 ? 1.0 - q : q;
        r = std::log(-std::log(r));
        double x = c[0];
        double rk = 1.0;
        for (int k = 1; k < 9; ++k) {
            rk *= r;
            x += c[k] * rk;
        }
        return q > 0.5 ? x : -x;
    };
    const double z = normal_quantile(p);
    const double t = 2.0 / (9.0 * df);
    const double cube = 1.0 - t + z * std::sqrt(t);
    return df * cube * cube * cube;
}

/// Maximizes f over the 3-atom probability simplex by a dense grid pass
/// followed by window refinements (barycentric (x, y), x + y <= 1).
/// Final resolution ~2.5e-7.
template <typename F>
std::array<double, 3> grid_argmax_simplex3(const F& f) {
    std::array<double, 3> best{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    double cx = best[0], cy = best[1];
    double step = 2e-3;
    double half = 1.0;  // first pass covers the whole simplex
    for (int level = 0; level < 4; ++level) {
        const double lo_x = std::max(0.0, cx - half);
        const double hi_x = std::min(1.0, cx + half);
        const double lo_y = std::max(0.0, cy - half);
        const double hi_y = std::min(1.0, cy + half);
        double best_val = -std::numeric_limits<double>::infinity();
        for (double x = lo_x; x <= hi_x + 1e-15; x += step) {
            for (double y = lo_y; y <= std::min(hi_y, 1.0 - x) + 1e-15; y += step) {
                const double z = std::max(0.0, 1.0 - x - y);
                const double val = f(x, y, z);
                if (val > best_val) {
                    best_val = val;
                    best = {x, y, z};
                }
            }
        }
        cx = best[0];
        cy = best[1];
        half = 5.0 * step;  // window comfortably covers the grid's localization error
        step /= 20.0;
    }
    return best;
}

}  // namespace test_util
