#include <cmath>

#include "corrugate/errors.hpp"
#include "corrugate/flow.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace corrugate;
using namespace testing_support;

namespace {

MetricField cos2(const PeriodicGrid& g, double amp) {
    MetricField h(g);
    h.set_component(0, 0, sample(g, [amp](double x, double) { return amp * std::cos(2 * x); }));
    return h;
}

double sup_abs(const MetricField& m) {
    double s = 0.0;
    for (double v : m.data()) s = std::max(s, std::abs(v));
    return s;
}

}  // namespace

TEST_CASE("psi ramp") {
    CHECK(psi_ramp(-1.0) == 0.0);
    CHECK(psi_ramp(2.0) == 1.0);
    CHECK(psi_ramp(0.5) == 0.5);
    double prev = 0.0;
    for (int i = 0; i <= 200; ++i) {
        const double s = -0.5 + 2.0 * i / 200;
        CHECK(psi_ramp(s) >= prev);
        prev = psi_ramp(s);
        CHECK(psi_ramp(s) + psi_ramp(1.0 - s) == doctest::Approx(1.0));
        const double h = 1e-6;
        CHECK(psi_ramp_derivative(s) == doctest::Approx((psi_ramp(s + h) - psi_ramp(s - h)) / (2 * h)).epsilon(1e-6));
    }
    CHECK(psi_ramp_derivative(0.0) == 0.0);
    CHECK(psi_ramp_derivative(1.0) == 0.0);
}

TEST_CASE("configuration and preconditions") {
    CHECK_THROWS_AS((FlowConfig{10.0, 12.0}.validate()), InputError);
    CHECK_THROWS_AS((FlowConfig{0.5, 100.0}.validate()), InputError);
    PeriodicGrid g(64);
    auto w = circle_map(g, 1.0, 2);
    CHECK_THROWS_AS(run_flow(w, cos2(g, 0.02)), InputError);  // |h|_3 = 0.3 above the default bound
    ImmersionField line(g, 2);
    line.offset(0) = {kTwoPi, 0.0};
    for (std::size_t p = 0; p < g.size(); ++p) line.at(p, 0) = g.point(p)[0];
    CHECK_THROWS_AS(run_flow(line, MetricField(g)), InputError);
}

TEST_CASE("zero target is a fixed point") {
    PeriodicGrid g(64);
    auto w = circle_map(g, 1.0, 2);
    auto st = make_flow_state(w, MetricField(g), 10.0);
    auto r = flow_rhs(st);
    CHECK(sup_abs(r.hdot) == 0.0);
    for (double v : r.wdot.values()) CHECK(v == 0.0);

    FlowConfig cfg;
    cfg.t_end = cfg.t0 + 5.0;
    auto run = run_flow(w, MetricField(g), cfg);
    CHECK(max_abs_diff(run.u.values(), w.values()) <= 1e-12);
    CHECK_FALSE(run.diagnostics.flagged);
    for (const auto& s : run.diagnostics.steps) {
        CHECK(s.hdot_bound == 0.0);
        CHECK(s.wdot_bound == 0.0);
        CHECK(s.w_deviation == 0.0);
    }
}

TEST_CASE("flow starts from the unperturbed metric") {
    PeriodicGrid g(64);
    auto st = make_flow_state(circle_map(g, 1.0, 2), MetricField::identity(g, 0.02), 10.0);
    CHECK(sup_abs(flow_h(st, 10.0)) == 0.0);
    CHECK(sup_abs(flow_hdot(st, 10.0)) == 0.0);
}

TEST_CASE("hdot matches a central difference of the h path") {
    PeriodicGrid g(64);
    const double t0 = 10.0, t = t0 + 0.5;
    auto errors = [&](double dt) {
        auto st = make_flow_state(circle_map(g, 1.0, 2), MetricField::identity(g, 0.02), t0);
        // synthetic history reaching past t so every evaluation sees stored values
        for (double tau = t0; tau <= t + 4 * dt + 1e-12; tau += dt)
            st.history.append(tau, cos2(g, 0.01 * std::cos(3.0 * tau)));
        auto fd = (1.0 / (2 * dt)) * (flow_h(st, t + dt) - flow_h(st, t - dt));
        return sup_abs(fd - flow_hdot(st, t));
    };
    const double e1 = errors(0.05), e2 = errors(0.025);
    MESSAGE("central-difference errors " << e1 << " " << e2);
    CHECK(e1 <= 1e-3);
    CHECK(e1 / e2 >= 3.0);

    // with an empty history h(t) = psi(t - t0) h exactly
    auto st = make_flow_state(circle_map(g, 1.0, 2), MetricField::identity(g, 0.02), t0);
    for (double dt : {0.05, 0.025}) {
        auto fd = (1.0 / (2 * dt)) * (flow_h(st, t + dt) - flow_h(st, t - dt));
        const double expect = 0.02 * (psi_ramp(0.5 + dt) - psi_ramp(0.5 - dt)) / (2 * dt);
        CHECK(sup_abs(fd) == doctest::Approx(expect).epsilon(1e-12));
        CHECK(std::abs(sup_abs(flow_hdot(st, t)) - sup_abs(fd)) <= 2.0 * dt * dt);
    }
}

TEST_CASE("history quadrature") {
    PeriodicGrid g(16);
    FlowHistory h;
    for (int k = 0; k <= 100; ++k) h.append(10.0 + 0.05 * k, MetricField::identity(g, 2.0));
    // constant E: int psi(t - tau) over [t0, t] = (t - t0) - 1/2 once the ramp has passed
    CHECK(h.integral(14.0, g).at(0, 0, 0) == doctest::Approx(2.0 * 3.5).epsilon(1e-3));
    CHECK(h.integral_rate(14.0, g).at(0, 0, 0) == doctest::Approx(2.0).epsilon(1e-3));
    CHECK_THROWS_AS(h.append(10.0, MetricField(g)), InputError);
}

TEST_CASE("divergence detector") {
    CHECK(rising_run({1, 2, 3, 4}, 0.0) == 3);
    CHECK(rising_run({1, 2, 3, 2}, 0.0) == 0);
    CHECK(rising_run({1, 2, 3, 4}, 2.5) == 2);
    std::vector<double> r{1.0};
    for (int i = 0; i < 25; ++i) r.push_back(r.back() * 1.01);
    CHECK(rising_run(r, 0.0) >= 20);
}

TEST_CASE("constant perturbation reaches the scaled metric") {
    PeriodicGrid g(128);
    FlowConfig cfg;
    cfg.tol = 1e-4;
    auto r = run_flow(circle_map(g, 1.0, 2), MetricField::identity(g, 0.04), cfg);
    CHECK(r.within_tolerance);
    auto m = pullback_metric(r.u);
    for (std::size_t p = 0; p < g.size(); ++p) CHECK(std::abs(m.at(p, 0, 0) - 1.04) <= 1e-4);
    CHECK_FALSE(r.diagnostics.flagged);
    for (const auto& s : r.diagnostics.steps) {
        CHECK(s.orthogonality <= 1e-8);
        CHECK(s.identity <= 1e-6);
    }

    auto spiked = r.diagnostics.steps;
    spiked[spiked.size() / 2].hdot_bound = 1e6;
    auto d = flow_diagnostics(spiked, cfg.t0);
    CHECK(d.flagged);
    CHECK(d.flag_reason.find("hdot") != std::string::npos);
    CHECK_THROWS_AS(flow_diagnostics({spiked[0]}, cfg.t0), InputError);
}

TEST_CASE("cos(2x) perturbation") {
    PeriodicGrid g(128);
    FlowConfig cfg;
    cfg.smallness = 0.5;
    auto r = run_flow(circle_map(g, 1.0, 2), cos2(g, 0.02), cfg);
    CHECK(r.final_residual <= 1e-3);
    CHECK_FALSE(r.diagnostics.flagged);
    for (const auto& s : r.diagnostics.steps) {
        CHECK(s.orthogonality <= 1e-8);
        CHECK(s.identity <= 1e-6);
    }
}
