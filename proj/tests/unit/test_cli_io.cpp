#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "corrugate/cli_io.hpp"
#include "corrugate/errors.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace corrugate;
using namespace testing_support;

namespace {

std::size_t line_count(const std::string& s) {
    std::size_t n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

StageReport sample_stage(int q) {
    StageReport r;
    r.eta = 0.1 * q;
    r.delta = std::ldexp(1.0, -2 * q);
    r.delta0 = 1.0 / 3.0;
    r.c0_delta = std::sqrt(2.0) / q;
    r.c1_delta = M_PI / q;
    r.defect_before = 1.25;
    r.defect_after = 0.1 / 7.0;
    r.margin_after = 1e-3 / 3.0;
    r.min_separation = 0.7;
    r.primitives = 12;
    r.resolution = {512, 256};
    r.lambdas = {8, 16.5, 1.0 / 3.0};
    return r;
}

void check_same(const StageReport& a, const StageReport& b) {
    CHECK(a.eta == b.eta);
    CHECK(a.delta == b.delta);
    CHECK(a.delta0 == b.delta0);
    CHECK(a.c0_delta == b.c0_delta);
    CHECK(a.c1_delta == b.c1_delta);
    CHECK(a.defect_before == b.defect_before);
    CHECK(a.defect_after == b.defect_after);
    CHECK(a.margin_after == b.margin_after);
    CHECK(a.min_separation == b.min_separation);
    CHECK(a.primitives == b.primitives);
    CHECK(a.resolution == b.resolution);
    CHECK(a.lambdas == b.lambdas);
}

}  // namespace

TEST_CASE("parse_config examples") {
    auto cfg = parse_config({"run", "--stages", "4", "--epsilon", "0.5"});
    CHECK(cfg.command == "run");
    CHECK(cfg.integer("stages") == 4);
    CHECK(cfg.number("epsilon") == 0.5);
    CHECK(cfg.seed == 0);
    CHECK(cfg.text("map") == "clifford");

    CHECK_THROWS_AS(parse_config({"run", "--stages", "-1"}), InputError);
    CHECK_THROWS_AS(parse_config({"run", "--stages", "two"}), InputError);
    CHECK_THROWS_AS(parse_config({"run", "--stages", "2.5"}), InputError);
    CHECK_THROWS_AS(parse_config({"run", "--colour", "red"}), InputError);
    CHECK_THROWS_AS(parse_config({"sculpt"}), InputError);
    CHECK_THROWS_AS(parse_config({}), InputError);
    try {
        parse_config({"run", "--bogus-key", "1"});
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("bogus-key") != std::string::npos);
    }
    CHECK(parse_config({"pullback", "--seed", "17"}).seed == 17);
    CHECK(parse_config({"flow"}).number("t0") == 10.0);
    for (const auto& s : subcommands()) CHECK(parse_config({s}).command == s);
    CHECK_THROWS_AS(parse_config({"--help"}), HelpRequested);
}

TEST_CASE("config file round trip") {
    const std::string path = "cli_io_roundtrip.ini";
    for (auto args : std::vector<std::vector<std::string>>{
             {"run", "--stages", "3", "--epsilon", "0.125", "--map", "circle", "--seed", "9"},
             {"smooth-bench", "--pairs", "1,0;2,2", "--output", "out file.csv"},
             {"flow", "--alpha", "0.020000000000000004", "--tend", "30"}}) {
        auto cfg = parse_config(args);
        {
            std::ofstream os(path);
            os << config_to_string(cfg);
        }
        auto back = parse_config_file(path);
        CHECK(back == cfg);
    }
    {
        std::ofstream os(path);
        os << "[run]\nstages=2\nunknown=1\n";
    }
    CHECK_THROWS_AS(parse_config_file(path), InputError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(parse_config_file("does-not-exist.ini"), InputError);
}

TEST_CASE("field round trips are lossless") {
    for (auto g : {PeriodicGrid(32), PeriodicGrid(16, 32)}) {
        ScalarField s(g, random_band_limited(g, 3, 5));
        std::stringstream ss;
        write_field(ss, s);
        CHECK(read_scalar_field(ss).values() == s.values());

        MetricField m(g);
        for (std::size_t i = 0; i < m.data().size(); ++i) m.data()[i] = std::sin(1.0 + i) / 3.0;
        std::stringstream sm;
        write_field(sm, m);
        auto mb = read_metric_field(sm);
        CHECK(mb.grid() == g);
        CHECK(mb.data() == m.data());
    }
    for (auto w : {clifford_map(PeriodicGrid(16, 16), 0.6), flat_strip(PeriodicGrid(16, 32)),
                   circle_map(PeriodicGrid(64), 1.3, 3)}) {
        std::stringstream ss;
        write_field(ss, w);
        auto b = read_immersion_field(ss);
        CHECK(b.grid() == w.grid());
        CHECK(b.values() == w.values());
        CHECK(b.offset(0) == w.offset(0));
        CHECK(b.offset(1) == w.offset(1));
    }
    std::stringstream wrong;
    write_field(wrong, ScalarField(PeriodicGrid(16), 1.0));
    CHECK_THROWS_AS(read_metric_field(wrong), InputError);
    std::stringstream truncated("# field scalar dim=1 res=16\ni,f\n0,1\n");
    CHECK_THROWS_AS(read_scalar_field(truncated), InputError);
}

TEST_CASE("primitives round trip") {
    PeriodicGrid g(32, 32);
    auto h = MetricField::identity(g, 1.25) - pullback_metric(clifford_map(g, 1.0));
    auto prims = global_decompose(h, 2);
    std::stringstream ss;
    write_primitives(ss, prims);
    const std::string text = ss.str();
    CHECK(text.find("# primitive id=0 patch=0") != std::string::npos);
    auto back = read_primitives(ss);
    REQUIRE(back.size() == prims.size());
    for (std::size_t k = 0; k < prims.size(); ++k) {
        CHECK(back[k].a.values() == prims[k].a.values());
        CHECK(back[k].psi.values() == prims[k].psi.values());
        CHECK(back[k].dpsi == prims[k].dpsi);
        CHECK(back[k].psi_origin == prims[k].psi_origin);
        CHECK(back[k].support_id == prims[k].support_id);
        CHECK(back[k].id == prims[k].id);
    }
}

TEST_CASE("report emission") {
    std::stringstream empty;
    emit_report(empty, RunReport{});
    CHECK(line_count(empty.str()) == 1);

    RunReport r;
    for (int q = 1; q <= 4; ++q) {
        r.stages.push_back(sample_stage(q));
        r.slack.push_back(1e-13 * q);
        r.c1_increments.push_back(1.0 / (q + 0.3));
    }
    std::stringstream ss;
    emit_report(ss, r);
    CHECK(line_count(ss.str()) == 5);
    auto back = parse_run_report(ss);
    REQUIRE(back.stages.size() == 4);
    for (int q = 0; q < 4; ++q) check_same(back.stages[q], r.stages[q]);
    CHECK(back.slack == r.slack);
    CHECK(back.c1_increments == r.c1_increments);

    std::stringstream one;
    emit_report(one, sample_stage(1));
    CHECK(line_count(one.str()) == 2);
}

TEST_CASE("OBJ export") {
    std::stringstream small;
    write_obj_mesh(small, 2, 2, {{0, 0, 0}, {0, 1, 0}, {1, 0, 0}, {1, 1, 0}});
    auto c = count_obj(small);
    CHECK(c.vertices == 4);
    CHECK(c.faces == 4);
    CHECK(c.indices_valid);

    PeriodicGrid g(32, 16);
    const double r = 0.8;
    auto w = clifford_map(g, r);
    std::stringstream ss;
    export_obj(ss, w);
    std::string line;
    std::stringstream copy(ss.str());
    while (std::getline(copy, line)) {
        if (line.rfind("v ", 0) != 0) continue;
        double x, y, z;
        std::sscanf(line.c_str(), "v %lf %lf %lf", &x, &y, &z);
        CHECK((std::isfinite(x) && std::isfinite(y) && std::isfinite(z)));
        CHECK(std::hypot(x, y) == doctest::Approx(r).epsilon(1e-12));
        CHECK(std::abs(z) <= r + 1e-12);
    }
    auto counts = count_obj(ss);
    CHECK(counts.vertices == g.size());
    CHECK(counts.faces == g.size());
    CHECK(counts.indices_valid);

    std::stringstream bad;
    CHECK_THROWS_AS(export_obj(bad, circle_map(PeriodicGrid(16), 1.0, 3)), InputError);
}

TEST_CASE("map construction and exit codes") {
    auto c = build_map(parse_config({"free-check", "--map", "circle", "--resolution", "32"}));
    CHECK(c.grid().dim() == 1);
    CHECK(c.ambient() == 2);
    auto t = build_map(parse_config({"free-check", "--extra-axes", "3", "--resolution", "16"}));
    CHECK(t.ambient() == 7);
    auto r1 = build_map(parse_config({"free-check", "--map", "random", "--seed", "5", "--resolution", "16"}));
    auto r2 = build_map(parse_config({"free-check", "--map", "random", "--seed", "5", "--resolution", "16"}));
    auto r3 = build_map(parse_config({"free-check", "--map", "random", "--seed", "6", "--resolution", "16"}));
    CHECK(r1.values() == r2.values());
    CHECK(r1.values() != r3.values());
    CHECK_THROWS_AS(build_map(parse_config({"free-check", "--map", "sphere"})), InputError);

    CHECK(exit_code(ErrorKind::Input) == 2);
    CHECK(exit_code(ErrorKind::Nonconvergence) == 3);
    CHECK(exit_code(ErrorKind::Capability) == 4);
    CHECK(exit_code(InputError("x").kind()) == 2);
    CHECK(exit_code(DivergenceError("x").kind()) == 3);
    CHECK(exit_code(ResolutionError("x").kind()) == 4);
}
