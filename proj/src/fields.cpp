#include "corrugate/fields.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "corrugate/errors.hpp"
#include "corrugate/parallel.hpp"
#include "corrugate/spectral.hpp"

namespace corrugate {

namespace {

double binom(int n, int k) {
    double r = 1.0;
    for (int s = 1; s <= k; ++s) r = r * (n - k + s) / s;
    return r;
}

// acc[p] += weight * |D^order f|^2 at each node; slope adds the constant
// first derivative of a linear lift.
void add_derivative_square(const PeriodicGrid& g, const Spectrum& s, int order, double weight,
                           std::vector<double>& acc, const std::array<double, 2>& slope = {0.0, 0.0}) {
    if (order == 0) {
        auto v = s.real();
        for (std::size_t p = 0; p < v.size(); ++p) acc[p] += weight * v[p] * v[p];
        return;
    }
    if (g.dim() == 1) {
        auto v = s.derivative(order);
        const double c = order == 1 ? slope[0] : 0.0;
        for (std::size_t p = 0; p < v.size(); ++p) acc[p] += weight * (v[p] + c) * (v[p] + c);
        return;
    }
    for (int j = 0; j <= order; ++j) {
        auto v = s.derivative(j, order - j);
        double c = 0.0;
        if (order == 1) c = j == 1 ? slope[0] : slope[1];
        const double mult = weight * binom(order, j);
        for (std::size_t p = 0; p < v.size(); ++p) acc[p] += mult * (v[p] + c) * (v[p] + c);
    }
}

double sup_sqrt(const std::vector<double>& acc) {
    double m = 0.0;
    for (double x : acc) m = std::max(m, x);
    return std::sqrt(m);
}

void check_order(int k) {
    if (k < 0) throw InputError("norm order must be nonnegative");
    if (k > kMaxNormOrder) throw CapabilityError("norm order " + std::to_string(k) + " exceeds supported order 4");
}

}  // namespace

MapDerivatives map_derivatives(const ImmersionField& w, bool second_order) {
    const auto& g = w.grid();
    const int N = w.ambient(), d = g.dim();
    require_finite(w.values(), "map");
    MapDerivatives out;
    out.dim = d;
    out.N = N;
    for (int i = 0; i < d; ++i) out.d1[i].assign(g.size() * N, 0.0);
    if (second_order)
        for (int s = 0; s < MetricField::components(d); ++s) out.d2[s].assign(g.size() * N, 0.0);
    for (int a = 0; a < N; ++a) {
        bool zero = w.offset(0)[a] == 0.0 && w.offset(1)[a] == 0.0;
        for (std::size_t p = 0; zero && p < g.size(); ++p) zero = w.at(p, a) == 0.0;
        if (zero) continue;
        Spectrum s(g, w.periodic_component(a));
        for (int i = 0; i < d; ++i) {
            auto v = d == 1 ? s.derivative(1) : (i == 0 ? s.derivative(1, 0) : s.derivative(0, 1));
            const double c = w.offset(i)[a] / kTwoPi;
            for (std::size_t p = 0; p < g.size(); ++p) out.d1[i][p * N + a] = v[p] + c;
        }
        if (!second_order) continue;
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j) {
                auto v = d == 1 ? s.derivative(2) : s.derivative((i == 0) + (j == 0), (i == 1) + (j == 1));
                auto& dst = out.d2[MetricField::slot(d, i, j)];
                for (std::size_t p = 0; p < g.size(); ++p) dst[p * N + a] = v[p];
            }
    }
    return out;
}

MetricField pullback_metric(const MapDerivatives& d, const PeriodicGrid& g) {
    MetricField m(g);
    const int N = d.N;
    parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t p = b; p < e; ++p)
            for (int i = 0; i < d.dim; ++i)
                for (int j = i; j < d.dim; ++j) {
                    const double* u = d.first(p, i);
                    const double* v = d.first(p, j);
                    double s = 0.0;
                    for (int a = 0; a < N; ++a) s += u[a] * v[a];
                    m.at(p, i, j) = s;
                }
    });
    return m;
}

MetricField pullback_metric(const ImmersionField& w) { return pullback_metric(map_derivatives(w), w.grid()); }

double sup_norm(const ScalarField& f, int k) {
    check_order(k);
    require_finite(f.values(), "scalar field");
    Spectrum s(f.grid(), f.values());
    double total = 0.0;
    for (int i = 0; i <= k; ++i) {
        std::vector<double> acc(f.grid().size(), 0.0);
        add_derivative_square(f.grid(), s, i, 1.0, acc);
        total += sup_sqrt(acc);
    }
    return total;
}

double sup_norm(const MetricField& f, int k) {
    check_order(k);
    require_finite(f.data(), "metric field");
    const int d = f.dim();
    std::vector<Spectrum> spectra;
    std::vector<double> weights;
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            spectra.emplace_back(f.grid(), f.component(i, j));
            weights.push_back(i == j ? 1.0 : 2.0);
        }
    double total = 0.0;
    for (int i = 0; i <= k; ++i) {
        std::vector<double> acc(f.grid().size(), 0.0);
        for (std::size_t c = 0; c < spectra.size(); ++c) add_derivative_square(f.grid(), spectra[c], i, weights[c], acc);
        total += sup_sqrt(acc);
    }
    return total;
}

double sup_norm(const ImmersionField& f, int k) {
    check_order(k);
    require_finite(f.values(), "map");
    const auto& g = f.grid();
    std::vector<double> acc0(g.size(), 0.0);
    for (std::size_t p = 0; p < g.size(); ++p)
        for (int a = 0; a < f.ambient(); ++a) acc0[p] += f.at(p, a) * f.at(p, a);
    double total = sup_sqrt(acc0);
    if (k == 0) return total;
    std::vector<std::vector<double>> acc(k + 1, std::vector<double>(g.size(), 0.0));
    for (int a = 0; a < f.ambient(); ++a) {
        Spectrum s(g, f.periodic_component(a));
        std::array<double, 2> slope{f.offset(0)[a] / kTwoPi, f.offset(1)[a] / kTwoPi};
        for (int i = 1; i <= k; ++i) add_derivative_square(g, s, i, 1.0, acc[i], slope);
    }
    for (int i = 1; i <= k; ++i) total += sup_sqrt(acc[i]);
    return total;
}

std::vector<double> min_eigenvalues(const MetricField& m) {
    std::vector<double> out(m.grid().size());
    for (std::size_t p = 0; p < out.size(); ++p) {
        if (m.dim() == 1) {
            out[p] = m.at(p, 0, 0);
            continue;
        }
        const double a = m.at(p, 0, 0), b = m.at(p, 0, 1), c = m.at(p, 1, 1);
        out[p] = 0.5 * (a + c) - std::hypot(0.5 * (a - c), b);
    }
    return out;
}

Shortness is_short(const ImmersionField& w, const MetricField& g, bool strict) {
    require_same_grid(w.grid(), g.grid(), "is_short");
    auto gap = g - pullback_metric(w);
    double margin = std::numeric_limits<double>::infinity();
    for (double e : min_eigenvalues(gap)) margin = std::min(margin, e);
    const bool ok = strict ? margin > kShortTolerance : margin >= -kShortTolerance;
    return {ok, margin};
}

ScalarField resample(const ScalarField& f, const PeriodicGrid& to) {
    return ScalarField(to, resample_samples(f.grid(), f.values(), to));
}

MetricField resample(const MetricField& f, const PeriodicGrid& to) {
    MetricField out(to);
    for (int i = 0; i < f.dim(); ++i)
        for (int j = i; j < f.dim(); ++j) out.set_component(i, j, resample_samples(f.grid(), f.component(i, j), to));
    return out;
}

ImmersionField resample(const ImmersionField& f, const PeriodicGrid& to) {
    ImmersionField out(to, f.ambient());
    for (int ax = 0; ax < 2; ++ax) out.offset(ax) = f.offset(ax);
    for (int a = 0; a < f.ambient(); ++a)
        out.set_periodic_component(a, resample_samples(f.grid(), f.periodic_component(a), to));
    return out;
}

ImmersionField clifford_map(const PeriodicGrid& g, double r) {
    if (g.dim() != 2) throw InputError("Clifford map needs a 2-D grid");
    ImmersionField w(g, 4);
    for (std::size_t p = 0; p < g.size(); ++p) {
        auto x = g.point(p);
        w.at(p, 0) = r * std::cos(x[0]);
        w.at(p, 1) = r * std::sin(x[0]);
        w.at(p, 2) = r * std::cos(x[1]);
        w.at(p, 3) = r * std::sin(x[1]);
    }
    return w;
}

ImmersionField flat_strip(const PeriodicGrid& g, int N) {
    if (N < g.dim()) throw InputError("flat strip needs N >= dim");
    ImmersionField w(g, N);
    for (int ax = 0; ax < g.dim(); ++ax) w.offset(ax)[ax] = kTwoPi;
    for (std::size_t p = 0; p < g.size(); ++p) {
        auto x = g.point(p);
        for (int ax = 0; ax < g.dim(); ++ax) w.at(p, ax) = x[ax];
    }
    return w;
}

ImmersionField circle_map(const PeriodicGrid& g, double r, int N) {
    if (g.dim() != 1 || N < 2) throw InputError("circle map needs a 1-D grid and N >= 2");
    ImmersionField w(g, N);
    for (std::size_t p = 0; p < g.size(); ++p) {
        const double x = g.point(p)[0];
        w.at(p, 0) = r * std::cos(x);
        w.at(p, 1) = r * std::sin(x);
    }
    return w;
}

}  // namespace corrugate
