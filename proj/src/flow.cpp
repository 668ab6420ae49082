#include "corrugate/flow.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "corrugate/errors.hpp"
#include "corrugate/least_norm.hpp"
#include "corrugate/smoothing.hpp"

namespace corrugate {

double psi_ramp(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

double psi_ramp_derivative(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double y = s * (1.0 - s);
    return 30.0 * y * y;
}

void FlowConfig::validate() const {
    if (!(t0 > 1.0)) throw InputError("flow: t0 must exceed 1");
    if (!(t_end >= t0 + 5.0)) throw InputError("flow: end time must be at least t0 + 5");
    if (!(dt > 0.0) || dt > 1.0) throw InputError("flow: time step must lie in (0, 1]");
    if (!(tol > 0.0)) throw InputError("flow: tolerance must be positive");
    if (divergence_steps < 1) throw InputError("flow: divergence window must be positive");
}

void FlowHistory::append(double t, MetricField e) {
    if (!times_.empty() && !(t > times_.back())) throw InputError("flow history: times must increase");
    if (times_.empty()) {
        prefix_.emplace_back(e.grid());
    } else {
        prefix_.push_back(prefix_.back() + (0.5 * (t - times_.back())) * (e_.back() + e));
    }
    times_.push_back(t);
    e_.push_back(std::move(e));
}

MetricField FlowHistory::at(double tau) const {
    if (tau >= times_.back()) return e_.back();
    if (tau <= times_.front()) return e_.front();
    auto it = std::upper_bound(times_.begin(), times_.end(), tau);
    const std::size_t k = std::size_t(it - times_.begin()) - 1;
    const double th = (tau - times_[k]) / (times_[k + 1] - times_[k]);
    return (1.0 - th) * e_[k] + th * e_[k + 1];
}

MetricField FlowHistory::prefix(double tau) const {
    if (tau <= times_.front()) return MetricField(e_.front().grid());
    if (tau >= times_.back()) return prefix_.back() + (tau - times_.back()) * e_.back();
    auto it = std::upper_bound(times_.begin(), times_.end(), tau);
    const std::size_t k = std::size_t(it - times_.begin()) - 1;
    return prefix_[k] + (0.5 * (tau - times_[k])) * (e_[k] + at(tau));
}

// Trapezoid rule on {a} + stored times in (a, t) + {t} for E(tau) k(t - tau).
MetricField FlowHistory::window(double t, bool rate, const PeriodicGrid& g) const {
    MetricField out(g);
    if (times_.empty()) return out;
    const double a = std::max(times_.front(), t - 1.0);
    if (!(t > a)) return out;
    std::vector<double> pts{a};
    for (double tau : times_)
        if (tau > a && tau < t) pts.push_back(tau);
    pts.push_back(t);
    auto kernel = [&](double tau) { return rate ? psi_ramp_derivative(t - tau) : psi_ramp(t - tau); };
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double w = 0.0;
        if (i > 0) w += 0.5 * (pts[i] - pts[i - 1]);
        if (i + 1 < pts.size()) w += 0.5 * (pts[i + 1] - pts[i]);
        const double k = kernel(pts[i]);
        if (k == 0.0 || w == 0.0) continue;
        out += (w * k) * at(pts[i]);
    }
    return out;
}

MetricField FlowHistory::integral(double t, const PeriodicGrid& g) const {
    if (times_.empty()) return MetricField(g);
    const double a = std::max(times_.front(), t - 1.0);
    return prefix(a) + window(t, false, g);
}

MetricField FlowHistory::integral_rate(double t, const PeriodicGrid& g) const { return window(t, true, g); }

FlowState make_flow_state(const ImmersionField& w0, const MetricField& h_target, double t0) {
    require_same_grid(w0.grid(), h_target.grid(), "flow");
    return FlowState{t0, t0, w0, w0, h_target, {}};
}

MetricField flow_h(const FlowState& s, double t) {
    const auto& g = s.w0.grid();
    auto m = psi_ramp(t - s.t0) * s.h_target + s.history.integral(t, g);
    return smooth(m, 1.0 / t);
}

MetricField flow_hdot(const FlowState& s, double t) {
    const auto& g = s.w0.grid();
    auto m = psi_ramp(t - s.t0) * s.h_target + s.history.integral(t, g);
    auto mdot = psi_ramp_derivative(t - s.t0) * s.h_target + s.history.integral_rate(t, g);
    return (-1.0 / (t * t)) * smooth_eps_derivative(m, 1.0 / t) + smooth(mdot, 1.0 / t);
}

namespace {

// 2 da (.) db for first-derivative sets da, db.
MetricField symmetric_product(const MapDerivatives& da, const MapDerivatives& db, const PeriodicGrid& g) {
    MetricField out(g);
    const int N = da.N;
    for (std::size_t p = 0; p < g.size(); ++p)
        for (int i = 0; i < da.dim; ++i)
            for (int j = i; j < da.dim; ++j) {
                double s = 0.0;
                for (int a = 0; a < N; ++a)
                    s += da.first(p, i)[a] * db.first(p, j)[a] + da.first(p, j)[a] * db.first(p, i)[a];
                out.at(p, i, j) = s;
            }
    return out;
}

double sup_abs(const MetricField& m) {
    double worst = 0.0;
    for (double v : m.data()) worst = std::max(worst, std::abs(v));
    return worst;
}

const char* kAdvice = "; try doubling t0 and halving the perturbation";

}  // namespace

FlowRates flow_rhs(const FlowState& s, double t, const ImmersionField& w) {
    const auto& g = w.grid();
    FlowRates r;
    r.h = flow_h(s, t);
    r.hdot = flow_hdot(s, t);
    r.smoothed = smooth(w, 1.0 / t);
    auto d = map_derivatives(r.smoothed, true);
    try {
        r.wdot = apply_L(r.smoothed, d, r.hdot);
    } catch (const SingularityError& e) {
        throw DivergenceError("flow: smoothed map lost freeness at t = " + std::to_string(t) + kAdvice);
    }
    auto dw = map_derivatives(r.wdot);
    r.identity = sup_abs(symmetric_product(d, dw, g) - r.hdot);
    for (std::size_t p = 0; p < g.size(); ++p)
        for (int i = 0; i < d.dim; ++i) {
            double dot = 0.0;
            for (int a = 0; a < d.N; ++a) dot += d.first(p, i)[a] * r.wdot.at(p, a);
            r.orthogonality = std::max(r.orthogonality, std::abs(dot));
        }
    r.e = symmetric_product(map_derivatives(r.smoothed - w), dw, g);
    return r;
}

int rising_run(const std::vector<double>& r, double floor) {
    int run = 0;
    for (std::size_t i = r.size(); i-- > 1;) {
        if (!(r[i] > r[i - 1] && r[i] > floor)) break;
        ++run;
    }
    return run;
}

FlowDiagnostics flow_diagnostics(const std::vector<FlowStep>& steps, double t0) {
    if (steps.size() < 2) throw InputError("flow_diagnostics: need at least 2 recorded steps");
    FlowDiagnostics out;
    out.steps = steps;
    double ref[3] = {0.0, 0.0, 0.0};
    auto values = [](const FlowStep& s) { return std::array<double, 3>{s.hdot_bound, s.wdot_bound, s.w_deviation}; };
    const char* names[3] = {"t^4|hdot|_0 + |hdot|_4", "t^4|wdot|_0 + |wdot|_4", "|w - w0|_3"};
    for (const auto& s : steps)
        if (s.t <= t0 + 1.0 + 1e-12) {
            auto v = values(s);
            for (int i = 0; i < 3; ++i) ref[i] = std::max(ref[i], v[i]);
        }
    for (const auto& s : steps) {
        auto v = values(s);
        for (int i = 0; i < 3; ++i)
            if (v[i] > kGrowthFlag * ref[i] || !std::isfinite(v[i])) {
                out.flagged = true;
                out.flag_reason = std::string(names[i]) + " grew more than 10x at t = " + std::to_string(s.t);
                return out;
            }
    }
    return out;
}

FlowResult run_flow(const ImmersionField& w0, const MetricField& h_target, const FlowConfig& cfg) {
    cfg.validate();
    require_same_grid(w0.grid(), h_target.grid(), "run_flow");
    require_finite(h_target.data(), "h_target");
    if (!is_free(w0).free) throw InputError("run_flow: initial map is not free");
    const auto base = pullback_metric(w0);
    const double small = cfg.smallness >= 0.0 ? cfg.smallness : 0.05 * sup_norm(base, 0);
    const double hsize = sup_norm(h_target, 3);
    if (hsize > small)
        throw InputError("run_flow: |h|_3 = " + std::to_string(hsize) + " exceeds the smallness bound " +
                         std::to_string(small) + kAdvice);
    const double floor = cfg.divergence_floor >= 0.0 ? cfg.divergence_floor : 0.1 * cfg.tol;

    FlowState st = make_flow_state(w0, h_target, cfg.t0);
    auto residual_of = [&](const ImmersionField& w) { return sup_abs(pullback_metric(w) - base - h_target); };
    std::vector<FlowStep> steps;
    const long nsteps = std::lround((cfg.t_end - cfg.t0) / cfg.dt);
    std::vector<double> residuals;
    for (long n = 0; n < nsteps; ++n) {
        const double t = cfg.t0 + n * cfg.dt, dt = cfg.dt;
        auto k1 = flow_rhs(st, t, st.w);
        st.history.append(t, k1.e);

        FlowStep rec;
        rec.t = t;
        const double t4 = t * t * t * t;
        rec.hdot_bound = t4 * sup_norm(k1.hdot, 0) + sup_norm(k1.hdot, 4);
        rec.wdot_bound = t4 * sup_norm(k1.wdot, 0) + sup_norm(k1.wdot, 4);
        rec.w_deviation = sup_norm(st.w - w0, 3);
        rec.residual = residual_of(st.w);
        rec.orthogonality = k1.orthogonality;
        rec.identity = k1.identity;
        residuals.push_back(rec.residual);
        if (rising_run(residuals, floor) >= cfg.divergence_steps)
            throw DivergenceError("flow: identity residual rose for " + std::to_string(cfg.divergence_steps) +
                                  " consecutive steps at t = " + std::to_string(t) + kAdvice);
        steps.push_back(rec);

        auto k2 = flow_rhs(st, t + 0.5 * dt, st.w + (0.5 * dt) * k1.wdot);
        auto k3 = flow_rhs(st, t + 0.5 * dt, st.w + (0.5 * dt) * k2.wdot);
        auto k4 = flow_rhs(st, t + dt, st.w + dt * k3.wdot);
        st.w += (dt / 6.0) * (k1.wdot + 2.0 * k2.wdot + 2.0 * k3.wdot + k4.wdot);
        st.t = t + dt;
    }
    FlowResult out;
    out.final_residual = residual_of(st.w);
    out.within_tolerance = out.final_residual <= cfg.tol;
    FlowStep last;
    last.t = st.t;
    last.w_deviation = sup_norm(st.w - w0, 3);
    last.residual = out.final_residual;
    auto kf = flow_rhs(st, st.t, st.w);
    const double t4 = std::pow(st.t, 4);
    last.hdot_bound = t4 * sup_norm(kf.hdot, 0) + sup_norm(kf.hdot, 4);
    last.wdot_bound = t4 * sup_norm(kf.wdot, 0) + sup_norm(kf.wdot, 4);
    last.orthogonality = kf.orthogonality;
    last.identity = kf.identity;
    steps.push_back(last);
    out.diagnostics = flow_diagnostics(steps, cfg.t0);
    out.u = std::move(st.w);
    return out;
}

}  // namespace corrugate
