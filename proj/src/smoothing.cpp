#include "corrugate/smoothing.hpp"

#include <cmath>
#include <string>

#include "corrugate/errors.hpp"
#include "corrugate/fields.hpp"
#include "corrugate/spectral.hpp"

namespace corrugate {

namespace {

// x^5 (126 - 420x + 540x^2 - 315x^3 + 70x^4)
double s4(double x) {
    return x * x * x * x * x * (126.0 + x * (-420.0 + x * (540.0 + x * (-315.0 + x * 70.0))));
}

double s4_prime(double x) {
    const double y = x * (1.0 - x);
    return 630.0 * y * y * y * y;
}

void check_eps(double eps) {
    if (!(eps > 0.0 && eps <= 1.0)) throw InputError("smoothing parameter must lie in (0, 1], got " + std::to_string(eps));
}

double wavenumber(int k0, int k1) { return std::hypot(double(k0), double(k1)); }

std::vector<double> apply(const PeriodicGrid& g, const std::vector<double>& f, double eps, bool derivative) {
    Spectrum s(g, f);
    if (derivative)
        return s.filtered([eps](int k0, int k1) {
            const double xi = wavenumber(k0, k1);
            return xi * smoothing_multiplier_derivative(eps * xi);
        });
    return s.filtered([eps](int k0, int k1) { return smoothing_multiplier(eps * wavenumber(k0, k1)); });
}

MetricField apply(const MetricField& t, double eps, bool derivative) {
    check_eps(eps);
    require_finite(t.data(), "metric field");
    MetricField out(t.grid());
    for (int i = 0; i < t.dim(); ++i)
        for (int j = i; j < t.dim(); ++j) out.set_component(i, j, apply(t.grid(), t.component(i, j), eps, derivative));
    return out;
}

// The linear lift is reproduced by S and annihilated by S'.
ImmersionField apply(const ImmersionField& t, double eps, bool derivative) {
    check_eps(eps);
    require_finite(t.values(), "map");
    ImmersionField out(t.grid(), t.ambient());
    if (!derivative)
        for (int ax = 0; ax < 2; ++ax) out.offset(ax) = t.offset(ax);
    for (int a = 0; a < t.ambient(); ++a)
        out.set_periodic_component(a, apply(t.grid(), t.periodic_component(a), eps, derivative));
    return out;
}

}  // namespace

double smoothing_multiplier(double s) {
    s = std::abs(s);
    if (s <= 0.5) return 1.0;
    if (s >= 1.0) return 0.0;
    return 1.0 - s4(2.0 * s - 1.0);
}

double smoothing_multiplier_derivative(double s) {
    const double a = std::abs(s);
    if (a <= 0.5 || a >= 1.0) return 0.0;
    return (s < 0 ? 2.0 : -2.0) * s4_prime(2.0 * a - 1.0);
}

ScalarField smooth(const ScalarField& t, double eps) {
    check_eps(eps);
    require_finite(t.values(), "scalar field");
    return ScalarField(t.grid(), apply(t.grid(), t.values(), eps, false));
}
MetricField smooth(const MetricField& t, double eps) { return apply(t, eps, false); }
ImmersionField smooth(const ImmersionField& t, double eps) { return apply(t, eps, false); }

ScalarField smooth_eps_derivative(const ScalarField& t, double eps) {
    check_eps(eps);
    require_finite(t.values(), "scalar field");
    return ScalarField(t.grid(), apply(t.grid(), t.values(), eps, true));
}
MetricField smooth_eps_derivative(const MetricField& t, double eps) { return apply(t, eps, true); }
ImmersionField smooth_eps_derivative(const ImmersionField& t, double eps) { return apply(t, eps, true); }

char family_name(EstimateFamily f) { return f == EstimateFamily::B ? 'b' : f == EstimateFamily::C ? 'c' : 'd'; }

double BenchTable::max_ratio(EstimateFamily f) const {
    return f == EstimateFamily::B ? max_b : f == EstimateFamily::C ? max_c : max_d;
}

double derivative_sup(const ScalarField& f, int r) {
    if (r == 0) return sup_norm(f, 0);
    return sup_norm(f, r) - sup_norm(f, r - 1);
}

BenchTable estimate_bench(const ScalarField& t, const std::vector<std::pair<int, int>>& pairs,
                          const std::vector<double>& eps) {
    BenchTable table;
    const auto& g = t.grid();
    Spectrum spec(g, t.values());
    for (auto [r, s] : pairs) {
        if (r < 0 || s < 0 || r > kMaxNormOrder || s > kMaxNormOrder)
            throw InputError("estimate_bench: orders must lie in [0, 4]");
        const double ts = sup_norm(t, s);
        for (double e : eps) {
            check_eps(e);
            auto add = [&](EstimateFamily fam, const std::vector<double>& v, double power) {
                BenchRow row{r, s, e, fam, derivative_sup(ScalarField(g, v), r), 0.0};
                row.ratio = ts > 0.0 ? row.lhs / (std::pow(e, power) * ts) : 0.0;
                double& m = fam == EstimateFamily::B ? table.max_b : fam == EstimateFamily::C ? table.max_c : table.max_d;
                m = std::max(m, row.ratio);
                table.rows.push_back(row);
            };
            if (r >= s)
                add(EstimateFamily::B,
                    spec.filtered([e](int k0, int k1) { return smoothing_multiplier(e * wavenumber(k0, k1)); }),
                    s - r);
            add(EstimateFamily::C, spec.filtered([e](int k0, int k1) {
                    const double xi = wavenumber(k0, k1);
                    return xi * smoothing_multiplier_derivative(e * xi);
                }),
                s - r - 1);
            if (s >= r)
                add(EstimateFamily::D,
                    spec.filtered([e](int k0, int k1) { return 1.0 - smoothing_multiplier(e * wavenumber(k0, k1)); }),
                    s - r);
        }
    }
    return table;
}

}  // namespace corrugate
