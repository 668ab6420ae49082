#include "corrugate/corrugation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "corrugate/errors.hpp"
#include "corrugate/parallel.hpp"

namespace corrugate {

namespace {

double sup_abs_metric(const MetricField& m) { return sup_norm(m, 0); }

struct SearchState {
    ImmersionField w;
    PrimitiveMetric prim;
    FramePair frame;
};

FramePair rebuild_frame(const ImmersionField& w, const Patch& region) {
    auto d = map_derivatives(w);
    return region.whole_chart ? normal_pair(w, d) : normal_pair_on_patch(w, d, region);
}

// Estimates for w_next = w_prev + inc, reusing the derivatives of w_prev.
EstimateCheck check_increment(const MapDerivatives& d_prev, const ImmersionField& inc, const PrimitiveMetric& prim,
                              double eta_budget, double delta_budget, double h_norm) {
    const auto& g = inc.grid();
    const auto d_inc = map_derivatives(inc);
    const int N = inc.ambient(), n = g.dim();
    EstimateCheck c;
    double c0 = 0.0, c1 = 0.0, err = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
        double s0 = 0.0, s1 = 0.0;
        const double* x = inc.point(p);
        for (int a = 0; a < N; ++a) s0 += x[a] * x[a];
        for (int i = 0; i < n; ++i) {
            const double* v = d_inc.first(p, i);
            for (int a = 0; a < N; ++a) s1 += v[a] * v[a];
        }
        const double a2 = prim.a[p] * prim.a[p];
        double e = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double *ui = d_prev.first(p, i), *uj = d_prev.first(p, j);
                const double *vi = d_inc.first(p, i), *vj = d_inc.first(p, j);
                double s = 0.0;
                for (int a = 0; a < N; ++a) s += ui[a] * vj[a] + vi[a] * uj[a] + vi[a] * vj[a];
                s -= a2 * prim.dpsi[i] * prim.dpsi[j];
                e += s * s;
            }
        c0 = std::max(c0, s0);
        c1 = std::max(c1, s1);
        err = std::max(err, e);
    }
    c.c0 = std::sqrt(c0);
    c.c1_squared = c1;
    c.increment = std::sqrt(err);
    c.c0_ok = c.c0 < eta_budget;
    c.c1_ok = c.c1_squared < 2.0 * h_norm;
    c.increment_ok = c.increment < delta_budget;
    return c;
}

void require_capacity(const PeriodicGrid& g, int N, const LambdaSearch& s) {
    if (g.size() * std::size_t(N) > s.max_field_doubles) {
        std::ostringstream os;
        os << "resolution cap: a " << g.res(0);
        if (g.dim() == 2) os << "x" << g.res(1);
        os << " grid with N = " << N << " exceeds the field budget of " << s.max_field_doubles << " values";
        throw CapabilityError(os.str());
    }
}

bool resolved(const PeriodicGrid& g, const std::array<int, 2>& need) {
    for (int a = 0; a < g.dim(); ++a)
        if (g.res(a) < need[a]) return false;
    return true;
}

LambdaChoice search_lambda(SearchState& st, const SpiralParams& budgets, double h_norm, const LambdaSearch& search,
                           const std::function<void(const PeriodicGrid&)>& refine) {
    double lambda = search.lambda0;
    EstimateCheck last;
    bool tried = false;
    MapDerivatives base;
    bool have_base = false;
    while (lambda <= search.cap) {
        const auto need = required_resolution(st.prim, lambda);
        while (!resolved(st.w.grid(), need)) {
            const auto next = st.w.grid().refined();
            require_capacity(next, st.w.ambient(), search);
            refine(next);
            have_base = false;
        }
        if (!have_base) {
            base = map_derivatives(st.w);
            have_base = true;
        }
        auto inc = spiral_perturbation(st.w, st.prim, st.frame, lambda);
        last = check_increment(base, inc, st.prim, budgets.eta_budget, budgets.delta_budget, h_norm);
        tried = true;
        if (last.pass()) {
            LambdaChoice out;
            out.params = {lambda, budgets.eta_budget, budgets.delta_budget};
            out.check = last;
            out.w = st.w;
            out.prim = st.prim;
            out.increment = std::move(inc);
            return out;
        }
        lambda *= 2.0;
    }
    throw NonconvergenceError("lambda exceeds cap " + std::to_string(search.cap) + " for primitive " +
                              std::to_string(st.prim.id) + (tried ? "; last check: " + last.describe() : ""));
}

}  // namespace

std::string EstimateCheck::describe() const {
    std::ostringstream os;
    os.precision(6);
    os << "c0=" << c0 << (c0_ok ? " ok" : " FAIL") << ", |Dw^p|^2=" << c1_squared << (c1_ok ? " ok" : " FAIL")
       << ", increment=" << increment << (increment_ok ? " ok" : " FAIL");
    return os.str();
}

std::array<int, 2> required_resolution(const PrimitiveMetric& prim, double lambda) {
    std::array<int, 2> need{0, 0};
    for (int a = 0; a < prim.a.grid().dim(); ++a)
        need[a] = static_cast<int>(std::ceil(kSamplesPerPeriod * lambda * std::abs(prim.dpsi[a]) - 1e-9));
    return need;
}

ImmersionField spiral_perturbation(const ImmersionField& w, const PrimitiveMetric& prim, const FramePair& frame,
                                   double lambda) {
    const auto& g = w.grid();
    require_same_grid(g, prim.a.grid(), "spiral_perturbation");
    require_same_grid(g, frame.nu.grid(), "spiral_perturbation frame");
    if (!(lambda >= 1.0)) throw InputError("lambda must be >= 1");
    const auto need = required_resolution(prim, lambda);
    for (int a = 0; a < g.dim(); ++a)
        if (g.res(a) < need[a])
            throw ResolutionError("fewer than 16 nodes per oscillation period on axis " + std::to_string(a) + " (have " +
                                  std::to_string(g.res(a)) + ", need " + std::to_string(need[a]) + ")");
    const int N = w.ambient();
    ImmersionField wp(g, N);
    for (std::size_t p = 0; p < g.size(); ++p) {
        const double a = prim.a[p];
        if (a == 0.0) continue;
        if (!frame.defined[p]) throw InputError("frame undefined on the support of the primitive");
        const double ph = lambda * prim.psi[p];
        const double c = a / lambda * std::cos(ph), s = a / lambda * std::sin(ph);
        const double* nu = frame.nu.point(p);
        const double* b = frame.b.point(p);
        double* out = wp.point(p);
        for (int k = 0; k < N; ++k) out[k] = c * nu[k] + s * b[k];
    }
    return wp;
}

EstimateCheck check_stage_estimates(const ImmersionField& w_prev, const ImmersionField& w_next,
                                    const PrimitiveMetric& prim, double eta_budget, double delta_budget,
                                    double h_norm) {
    require_same_grid(w_prev.grid(), w_next.grid(), "check_stage_estimates");
    require_same_grid(w_prev.grid(), prim.a.grid(), "check_stage_estimates");
    return check_increment(map_derivatives(w_prev), w_next - w_prev, prim, eta_budget, delta_budget, h_norm);
}

LambdaChoice choose_lambda(const ImmersionField& w, const PrimitiveMetric& prim, const FramePair& frame,
                           const SpiralParams& budgets, double h_norm, const LambdaSearch& search) {
    SearchState st{w, prim, frame};
    const Patch region = frame.region;
    return search_lambda(st, budgets, h_norm, search, [&](const PeriodicGrid& to) {
        st.w = resample(st.w, to);
        st.prim = resample(st.prim, to);
        st.frame = rebuild_frame(st.w, region);
    });
}

double c0_distance(const ImmersionField& u, const ImmersionField& v) {
    require_same_grid(u.grid(), v.grid(), "c0_distance");
    double m = 0.0;
    const int N = u.ambient();
    for (std::size_t p = 0; p < u.grid().size(); ++p) {
        double s = 0.0;
        for (int a = 0; a < N; ++a) s += std::pow(u.at(p, a) - v.at(p, a), 2);
        m = std::max(m, s);
    }
    return std::sqrt(m);
}

double c1_distance(const ImmersionField& u, const ImmersionField& v) {
    auto d = map_derivatives(u - v);
    const int N = d.N;
    double m = 0.0;
    for (std::size_t p = 0; p < u.grid().size(); ++p) {
        double s = 0.0;
        for (int i = 0; i < d.dim; ++i) {
            const double* x = d.first(p, i);
            for (int a = 0; a < N; ++a) s += x[a] * x[a];
        }
        m = std::max(m, s);
    }
    return std::sqrt(m);
}

double min_separation(const ImmersionField& w, std::size_t max_samples) {
    const auto& g = w.grid();
    std::size_t stride = 1;
    while (g.size() / stride > max_samples) stride *= 2;
    std::vector<std::size_t> nodes;
    for (std::size_t p = 0; p < g.size(); p += stride) nodes.push_back(p);
    auto chart_dist = [&](std::size_t p, std::size_t q) {
        auto x = g.point(p), y = g.point(q);
        double s = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
            double d = std::abs(x[a] - y[a]);
            d = std::min(d, kTwoPi - d);
            s += d * d;
        }
        return std::sqrt(s);
    };
    double best = std::numeric_limits<double>::infinity();
    const int N = w.ambient();
    for (std::size_t i = 0; i < nodes.size(); ++i)
        for (std::size_t j = i + 1; j < nodes.size(); ++j) {
            if (chart_dist(nodes[i], nodes[j]) < kTwoPi / 4) continue;
            double s = 0.0;
            for (int a = 0; a < N; ++a) s += std::pow(w.at(nodes[i], a) - w.at(nodes[j], a), 2);
            best = std::min(best, s);
        }
    return std::sqrt(best);
}

StageResult run_stage(const ImmersionField& w, const MetricField& g, double eta, double delta,
                      const StageOptions& options) {
    require_same_grid(w.grid(), g.grid(), "run_stage");
    if (!(eta > 0.0) || !(delta > 0.0)) throw InputError("run_stage: budgets must be positive");
    const auto pre = is_short(w, g, true);
    if (!pre.short_map)
        throw InputError("run_stage: map is not strictly short (margin " + std::to_string(pre.margin) + ")");
    const int n = g.dim();
    const int K = overlap_bound(n);
    const double gnorm = sup_norm(g, 0);

    StageReport rep;
    rep.eta = eta;
    rep.delta = delta;
    rep.delta0 = std::min(delta / (2.0 * gnorm + 1e-12), 0.5 * pre.margin / gnorm);
    rep.defect_before = sup_abs_metric(g - pullback_metric(w));

    ImmersionField start = w, cur = w;
    MetricField gg = g;
    auto make_h = [&]() { return (1.0 - rep.delta0) * gg - pullback_metric(start); };
    MetricField h = make_h();
    const double h_norm = sup_norm(h, 0);
    auto dec = global_decompose_patches(h, options.bump_count);
    rep.primitives = static_cast<int>(dec.primitives.size());
    const SpiralParams budgets{0.0, eta / K, 0.5 * delta / K};

    for (std::size_t j = 0; j < dec.primitives.size(); ++j) {
        double amax = 0.0;
        for (double v : dec.primitives[j].a.values()) amax = std::max(amax, v);
        if (amax == 0.0) {
            rep.lambdas.push_back(0.0);
            continue;
        }
        const Patch region = dec.patches[dec.primitives[j].support_id];
        SearchState st{cur, dec.primitives[j], rebuild_frame(cur, region)};
        if (region.whole_chart && st.frame.seam_mismatch > kSeamTolerance)
            throw StageError("normal frame seam mismatch " + std::to_string(st.frame.seam_mismatch) + " rad");
        auto choice = search_lambda(st, budgets, h_norm, options.search, [&](const PeriodicGrid& to) {
            cur = resample(cur, to);
            start = resample(start, to);
            gg = resample(gg, to);
            h = make_h();
            dec = global_decompose_patches(h, options.bump_count);
            st.w = cur;
            st.prim = dec.primitives[j];
            st.frame = rebuild_frame(cur, region);
        });
        cur = choice.w + choice.increment;
        rep.lambdas.push_back(choice.params.lambda);
    }

    const auto& fine = cur.grid();
    rep.resolution = {fine.res(0), fine.dim() == 2 ? fine.res(1) : 1};
    const auto w_fine = resample(w, fine);
    rep.c0_delta = c0_distance(cur, w_fine);
    rep.c1_delta = c1_distance(cur, w_fine);
    rep.defect_after = sup_abs_metric(gg - pullback_metric(cur));
    const auto post = is_short(cur, gg, true);
    rep.margin_after = post.margin;
    rep.min_separation = min_separation(cur);
    if (!post.short_map)
        throw StageError("stage output is not short (margin " + std::to_string(post.margin) + ", defect " +
                         std::to_string(rep.defect_after) + ")");
    return {std::move(cur), std::move(gg), std::move(rep)};
}

}  // namespace corrugate
