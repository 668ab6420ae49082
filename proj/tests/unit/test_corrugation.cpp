#include <cmath>

#include "corrugate/corrugation.hpp"
#include "corrugate/errors.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace corrugate;
using namespace testing_support;

namespace {

PrimitiveMetric strip_primitive(const PeriodicGrid& g, double amp) {
    PrimitiveMetric pr;
    pr.a = ScalarField(g, sample(g, [&](double x, double) { return 1.0 + amp * std::cos(x); }));
    pr.psi = ScalarField(g, sample(g, [](double x, double) { return x; }));
    pr.dpsi = {1.0, 0.0};
    return pr;
}

double metric_sup(const MetricField& m) { return sup_norm(m, 0); }

}  // namespace

TEST_CASE("zero amplitude gives a zero increment") {
    PeriodicGrid g(128, 16);
    auto w = flat_strip(g);
    auto pr = strip_primitive(g, 0.0);
    pr.a = ScalarField(g, 0.0);
    auto wp = spiral_perturbation(w, pr, normal_pair(w), 8.0);
    for (double v : wp.values()) CHECK(v == 0.0);
}

TEST_CASE("constant primitive on the flat strip adds exactly dpsi dpsi") {
    PeriodicGrid g(1024, 16);
    auto w = flat_strip(g);
    auto frame = normal_pair(w);
    auto pr = strip_primitive(g, 0.0);
    for (double lambda : {8.0, 16.0, 64.0}) {
        auto z = w + spiral_perturbation(w, pr, frame, lambda);
        auto err = pullback_metric(z) - MetricField::constant(g, {2, 0, 0, 1});
        CHECK(metric_sup(err) <= 1e-9);
        auto c = check_stage_estimates(w, z, pr, 1.0, 1.0, 1.0);
        CHECK(c.pass());
        CHECK(c.increment <= 1e-9);
        CHECK(c.c0 <= 1.0 / lambda + 1e-15);
    }
}

TEST_CASE("variable amplitude error matches the closed form Da Da / lambda^2") {
    // With a constant frame orthogonal to the strip the cross terms cancel and
    // the increment error is exactly (0.3 sin x)^2 / lambda^2 dx dx.
    PeriodicGrid g(1024, 16);
    auto w = flat_strip(g);
    auto frame = normal_pair(w);
    auto pr = strip_primitive(g, 0.3);
    std::vector<double> lx, ly;
    for (double lambda : {8.0, 16.0, 32.0, 64.0}) {
        auto c = check_stage_estimates(w, w + spiral_perturbation(w, pr, frame, lambda), pr, 1e9, 1e9);
        CHECK(c.increment == doctest::Approx(0.09 / (lambda * lambda)).epsilon(1e-6));
        lx.push_back(std::log(lambda));
        ly.push_back(std::log(c.increment));
    }
    const double slope = (ly.back() - ly.front()) / (lx.back() - lx.front());
    CHECK(slope == doctest::Approx(-2.0).epsilon(1e-3));
}

TEST_CASE("spiral amplitude bound and resolution precondition") {
    PeriodicGrid g(128, 16);
    auto w = flat_strip(g);
    auto pr = strip_primitive(g, 0.3);
    auto frame = normal_pair(w);
    auto wp = spiral_perturbation(w, pr, frame, 8.0);
    CHECK(sup_norm(wp, 0) <= sup_norm(pr.a, 0) / 8.0 + 1e-15);
    CHECK_THROWS_AS(spiral_perturbation(w, pr, frame, 16.0), ResolutionError);
}

TEST_CASE("estimate check flags the metric increment at small lambda") {
    PeriodicGrid g(256, 16);
    auto w = flat_strip(g);
    auto pr = strip_primitive(g, 0.3);
    auto c = check_stage_estimates(w, w + spiral_perturbation(w, pr, normal_pair(w), 4.0), pr, 1.0, 1e-3, 10.0);
    CHECK(c.c0_ok);
    CHECK(c.c1_ok);
    CHECK_FALSE(c.increment_ok);
    CHECK_FALSE(c.pass());

    auto zero = pr;
    zero.a = ScalarField(g, 0.0);
    auto z = check_stage_estimates(w, w, zero, 1e-12, 1e-12, 1e-12);
    CHECK(z.pass());
    CHECK(z.c0 == 0.0);
    CHECK(z.increment == 0.0);
}

TEST_CASE("choose_lambda examples") {
    PeriodicGrid g(256, 16);
    auto w = flat_strip(g);
    auto frame = normal_pair(w);
    auto flat = strip_primitive(g, 0.0);
    CHECK(choose_lambda(w, flat, frame, {8.0, 0.5, 1e-6}).params.lambda == 8.0);
    CHECK(choose_lambda(w, flat, frame, {}).params.lambda == 8.0);

    auto pr = strip_primitive(g, 0.3);
    auto first = choose_lambda(w, pr, frame, {8.0, 1.0, 1e-2});
    auto again = choose_lambda(w, pr, frame, {8.0, 1.0, 1e-2});
    CHECK(first.params.lambda == 8.0);
    CHECK(first.params.lambda == again.params.lambda);
    CHECK(first.increment.values() == again.increment.values());
}

TEST_CASE("choose_lambda refines the grid when the frequency outruns it") {
    PeriodicGrid g(64, 16);
    auto w = flat_strip(g);
    auto pr = strip_primitive(g, 0.3);
    auto c = choose_lambda(w, pr, normal_pair(w), {8.0, 1.0, 1e-4});
    CHECK(c.params.lambda == 32.0);
    CHECK(c.w.grid().res(0) == 512);
    CHECK(c.check.increment < 1e-4);
}

TEST_CASE("choose_lambda gives up past the cap") {
    PeriodicGrid g(64, 16);
    auto w = flat_strip(g);
    auto pr = strip_primitive(g, 0.3);
    LambdaSearch s;
    s.cap = 64.0;
    CHECK_THROWS_AS(choose_lambda(w, pr, normal_pair(w), {8.0, 1.0, 1e-12}, 1e9, s), NonconvergenceError);
}

TEST_CASE("stage precondition rejects isometric input") {
    PeriodicGrid g(32, 32);
    auto w = clifford_map(g, 1.0).embedded(2);
    CHECK_THROWS_AS(run_stage(w, pullback_metric(w), 0.5, 0.25), InputError);
}

TEST_CASE("one-dimensional stage: circle in R3") {
    PeriodicGrid g(64);
    auto w = circle_map(g, 1.0, 3);
    auto target = MetricField::identity(g, 1.44);
    auto r = run_stage(w, target, 0.5, 0.25);
    const auto& rep = r.report;
    CHECK(rep.defect_after < 0.25);
    CHECK(rep.defect_after < rep.defect_before);
    CHECK(rep.c0_delta < 0.5);
    CHECK(rep.c1_delta * rep.c1_delta <= 2.0 * 4.0 * rep.defect_before);
    CHECK(is_short(r.z, r.g, false).short_map);
    CHECK(rep.lambdas.size() == 2);
    for (double v : {rep.c0_delta, rep.c1_delta, rep.defect_before, rep.defect_after, rep.min_separation})
        CHECK((std::isfinite(v) && v >= 0.0));
}

TEST_CASE("stages are deterministic and preserve shortness") {
    PeriodicGrid g(64);
    for (double c : {1.1, 1.3, 1.6}) {
        auto w = circle_map(g, 1.0, 5);
        auto target = MetricField::identity(g, c * c);
        auto a = run_stage(w, target, 0.5, 0.25);
        auto b = run_stage(w, target, 0.5, 0.25);
        CHECK(a.z.values() == b.z.values());
        CHECK(is_short(a.z, a.g, false).short_map);
        if (a.report.defect_before > 0.25) CHECK(a.report.defect_after < a.report.defect_before);
        CHECK(a.report.defect_after < 0.25);
    }
}

TEST_CASE("torus stage without spare normal directions hits the resolution cap") {
    PeriodicGrid g(64, 64);
    auto w = clifford_map(g, 1.0);
    CHECK_THROWS_AS(run_stage(w, MetricField::identity(g, 2.25), 0.5, 0.25), CapabilityError);
}
