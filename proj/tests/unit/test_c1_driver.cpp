#include <cmath>

#include "corrugate/c1_driver.hpp"
#include "doctest.h"

using namespace corrugate;

TEST_CASE("schedule values") {
    IterationSchedule s{0.5, 4};
    CHECK(s.delta(1) == 0.25);
    CHECK(s.delta(2) == 0.0625);
    CHECK(s.delta(4) == std::ldexp(1.0, -8));
    CHECK(s.eta(1) == 0.125);
    double sum = 0.0;
    for (int q = 1; q <= 40; ++q) sum += s.eta(q);
    CHECK(sum <= s.epsilon / 2);
    CHECK_THROWS_AS((IterationSchedule{0.0, 4}.validate()), InputError);
    CHECK_THROWS_AS((IterationSchedule{0.5, -1}.validate()), InputError);
}

TEST_CASE("zero stages return the input") {
    PeriodicGrid g(64);
    auto w = circle_map(g, 1.0, 6);
    auto r = nash_kuiper_iterate(w, MetricField::identity(g, 2.25), {0.5, 0});
    CHECK(r.u.values() == w.values());
    CHECK(r.report.stages.empty());
    CHECK(r.report.c0_drift == 0.0);
}

TEST_CASE("driver preconditions") {
    PeriodicGrid g(64);
    auto w = circle_map(g, 1.0, 6);
    CHECK_THROWS_AS(nash_kuiper_iterate(w, MetricField::identity(g, 1.0), {0.5, 2}), InputError);
    CHECK_THROWS_AS(nash_kuiper_iterate(w, MetricField::identity(g, -1.0), {0.5, 2}), InputError);
}

TEST_CASE("cauchy audit examples") {
    auto a = c1_cauchy_audit(std::vector<double>{1, 0.5, 0.25});
    REQUIRE(a.ratios.size() == 2);
    CHECK(a.ratios[0] == 0.5);
    CHECK(a.ratios[1] == 0.5);
    CHECK(a.pass);
    CHECK_FALSE(c1_cauchy_audit(std::vector<double>{1, 1, 1}).pass);
    CHECK_THROWS_AS(c1_cauchy_audit(std::vector<double>{1, 0.5}), InputError);
}

TEST_CASE("four stages on the circle") {
    PeriodicGrid g(64);
    IterationSchedule s{0.5, 4};
    auto w = circle_map(g, 1.0, 18);
    auto target = MetricField::identity(g, 2.25);
    int calls = 0;
    auto r = nash_kuiper_iterate(w, target, s, {}, [&](int q, const StageResult& st) {
        ++calls;
        CHECK(is_short(st.z, st.g, true).short_map);
        CHECK(st.report.defect_after <= s.delta(q));
        CHECK(st.report.c0_delta <= s.eta(q));
    });
    CHECK(calls == 4);
    const auto& rep = r.report;
    CHECK(rep.stages.size() == 4);
    CHECK(rep.final_defect <= s.delta(4) + rep.slack.back());
    CHECK(rep.c0_drift <= s.epsilon / 2);
    CHECK(rep.c0_sum <= s.epsilon / 2);
    auto audit = c1_cauchy_audit(rep);
    CHECK(audit.pass);
    for (double x : rep.slack) CHECK((x > 0.0 && x < 1e-9));
}

TEST_CASE("a failing stage aborts with the partial report") {
    PeriodicGrid g(64, 64);
    auto w = clifford_map(g, 1.0).embedded(24);
    StageOptions opt;
    opt.search.max_field_doubles = std::size_t(1) << 20;
    try {
        nash_kuiper_iterate(w, MetricField::identity(g, 2.25), {0.5, 4}, opt);
        FAIL("expected an abort");
    } catch (const RunAborted& e) {
        CHECK(e.kind() == ErrorKind::Capability);
        CHECK(e.partial().stages.empty());
        CHECK(e.partial().error.find("stage 1") != std::string::npos);
    }
}
