#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "corrugate/grid.hpp"

namespace testing_support {

using corrugate::PeriodicGrid;

// Trigonometric polynomial with modes |k| <= kmax and coefficients ~ 1/(1+|k|)^decay.
inline std::vector<double> random_band_limited(const PeriodicGrid& g, std::uint64_t seed, int kmax,
                                               double decay = 2.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::vector<double> f(g.size(), 0.0);
    const int k1max = g.dim() == 2 ? kmax : 0;
    for (int k0 = 0; k0 <= kmax; ++k0)
        for (int k1 = -k1max; k1 <= k1max; ++k1) {
            const double s = 1.0 / std::pow(1.0 + std::hypot(k0, k1), decay);
            const double a = nd(rng) * s, b = nd(rng) * s;
            for (std::size_t p = 0; p < g.size(); ++p) {
                auto x = g.point(p);
                const double ph = k0 * x[0] + k1 * x[1];
                f[p] += a * std::cos(ph) + b * std::sin(ph);
            }
        }
    return f;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

template <class F>
std::vector<double> sample(const PeriodicGrid& g, F f) {
    std::vector<double> v(g.size());
    for (std::size_t p = 0; p < g.size(); ++p) {
        auto x = g.point(p);
        v[p] = f(x[0], x[1]);
    }
    return v;
}

}  // namespace testing_support
