// corrugate: command-line front end.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "corrugate/c1_driver.hpp"
#include "corrugate/cli_io.hpp"
#include "corrugate/errors.hpp"
#include "corrugate/flow.hpp"
#include "corrugate/least_norm.hpp"
#include "corrugate/normal_frame.hpp"
#include "corrugate/primitive_decomp.hpp"
#include "corrugate/smoothing.hpp"

using namespace corrugate;

namespace {

// Writes to path, or stdout when path is empty or "-".
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (path.empty() || path == "-") return;
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw InputError("cannot write '" + path + "'");
    }
    std::ostream& get() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

MetricField target_metric(const RunConfig& cfg, const PeriodicGrid& g, const char* file_key) {
    if (file_key && cfg.has(file_key) && !cfg.text(file_key).empty()) {
        std::ifstream is(cfg.text(file_key));
        if (!is) throw InputError("cannot open metric file '" + cfg.text(file_key) + "'");
        auto m = read_metric_field(is);
        require_same_grid(m.grid(), g, "target metric");
        return m;
    }
    const double c = cfg.number("target-scale");
    return MetricField::identity(g, c * c);
}

double sup_abs(const MetricField& m) {
    double s = 0.0;
    for (double v : m.data()) s = std::max(s, std::abs(v));
    return s;
}

int cmd_pullback(const RunConfig& cfg) {
    auto w = build_map(cfg);
    Sink out(cfg.text("output"));
    write_field(out.get(), pullback_metric(w));
    return 0;
}

int cmd_decompose(const RunConfig& cfg) {
    auto w = build_map(cfg);
    auto h = target_metric(cfg, w.grid(), "metric-file") - pullback_metric(w);
    auto dec = global_decompose_patches(h, cfg.integer("bumps"));
    const double err = sup_abs(reconstruct(dec.primitives, h.grid()) - h);
    int most = 0;
    for (int c : active_count(dec.primitives, h.grid())) most = std::max(most, c);
    Sink out(cfg.text("output"));
    write_primitives(out.get(), dec.primitives);
    std::fprintf(stderr, "primitives %zu  patches %zu  reconstruction error %.3e  max active %d (bound %d)\n",
                 dec.primitives.size(), dec.patches.size(), err, most, overlap_bound(h.dim()));
    return 0;
}

int cmd_frame(const RunConfig& cfg) {
    auto w = build_map(cfg);
    auto d = map_derivatives(w);
    auto f = normal_pair(w, d);
    auto a = audit_frame(f, d);
    const std::string prefix = cfg.text("out-prefix");
    Sink nu(prefix + "_nu.csv"), b(prefix + "_b.csv");
    write_field(nu.get(), f.nu);
    write_field(b.get(), f.b);
    std::printf("seam mismatch %.3e rad  unit %.2e  orth %.2e  normal %.2e\n", f.seam_mismatch, a.unit, a.orth, a.normal);
    return 0;
}

int cmd_stage(const RunConfig& cfg) {
    auto w = build_map(cfg);
    StageOptions opt;
    opt.bump_count = cfg.integer("bumps");
    auto r = run_stage(w, target_metric(cfg, w.grid(), nullptr), cfg.number("eta"), cfg.number("delta"), opt);
    const std::string prefix = cfg.text("out-prefix");
    Sink map(prefix + "_map.csv"), rep(prefix + "_report.csv");
    write_field(map.get(), r.z);
    emit_report(rep.get(), r.report);
    std::printf("defect %.4e -> %.4e  C0 %.4e  C1 %.4e  resolution %d\n", r.report.defect_before,
                r.report.defect_after, r.report.c0_delta, r.report.c1_delta, r.report.resolution[0]);
    return 0;
}

int cmd_run(const RunConfig& cfg) {
    auto w = build_map(cfg);
    IterationSchedule s{cfg.number("epsilon"), cfg.integer("stages")};
    StageOptions opt;
    opt.bump_count = cfg.integer("bumps");
    const std::string prefix = cfg.text("out-prefix");
    auto write_report = [&](const RunReport& r) {
        Sink rep(prefix + "_report.csv");
        emit_report(rep.get(), r);
    };
    RunResult res;
    try {
        res = nash_kuiper_iterate(w, target_metric(cfg, w.grid(), nullptr), s, opt,
                                  [&](int q, const StageResult& st) {
                                      Sink out(prefix + "_stage" + std::to_string(q) + ".csv");
                                      write_field(out.get(), st.z);
                                      std::printf("stage %d  defect %.4e  C0 %.4e  C1 %.4e  resolution %d\n", q,
                                                  st.report.defect_after, st.report.c0_delta, st.report.c1_delta,
                                                  st.report.resolution[0]);
                                      std::fflush(stdout);
                                  });
    } catch (const RunAborted& e) {
        write_report(e.partial());
        throw;
    }
    write_report(res.report);
    if (res.u.grid().dim() == 2) {
        Sink mesh(prefix + "_final.obj");
        export_obj(mesh.get(), res.u);
    }
    std::printf("final defect %.4e  C0 drift %.4e\n", res.report.final_defect, res.report.c0_drift);
    if (res.report.c1_increments.size() >= 3) {
        auto a = c1_cauchy_audit(res.report);
        std::printf("C1 ratio geometric mean %.3f (%s)\n", a.geometric_mean, a.pass ? "pass" : "fail");
    }
    return 0;
}

int cmd_flow(const RunConfig& cfg) {
    PeriodicGrid g(cfg.integer("resolution"));
    auto w0 = circle_map(g, cfg.number("radius"), 2);
    MetricField h = MetricField::identity(g, cfg.number("alpha"));
    if (!cfg.text("h-file").empty()) {
        std::ifstream is(cfg.text("h-file"));
        if (!is) throw InputError("cannot open perturbation file '" + cfg.text("h-file") + "'");
        h = read_metric_field(is);
        require_same_grid(h.grid(), g, "perturbation");
    }
    FlowConfig fc;
    fc.t0 = cfg.number("t0");
    fc.t_end = cfg.number("tend");
    fc.dt = cfg.number("dt");
    fc.tol = cfg.number("tol");
    fc.smallness = cfg.number("smallness");
    auto r = run_flow(w0, h, fc);
    const std::string prefix = cfg.text("out-prefix");
    Sink diag(prefix + "_diagnostics.csv"), map(prefix + "_map.csv");
    emit_flow_diagnostics(diag.get(), r.diagnostics);
    write_field(map.get(), r.u);
    std::printf("final identity residual %.3e (tolerance %.1e)\n", r.final_residual, fc.tol);
    if (r.diagnostics.flagged) std::printf("warning: %s\n", r.diagnostics.flag_reason.c_str());
    if (!r.within_tolerance)
        throw NonconvergenceError("flow residual above tolerance; try doubling t0 and halving the perturbation");
    return 0;
}

int cmd_smooth_bench(const RunConfig& cfg) {
    PeriodicGrid g(cfg.integer("resolution"));
    ScalarField t(g);
    for (std::size_t p = 0; p < g.size(); ++p)
        for (int k = 1; k <= 16; ++k) t[p] += std::cos(k * g.point(p)[0]) / (k * k);
    std::vector<std::pair<int, int>> pairs;
    std::string spec = cfg.text("pairs");
    std::size_t start = 0;
    while (start <= spec.size()) {
        auto end = spec.find(';', start);
        auto item = spec.substr(start, end == std::string::npos ? std::string::npos : end - start);
        int r = 0, s = 0;
        if (std::sscanf(item.c_str(), "%d,%d", &r, &s) != 2) throw InputError("bad --pairs entry '" + item + "'");
        pairs.emplace_back(r, s);
        if (end == std::string::npos) break;
        start = end + 1;
    }
    std::vector<double> eps;
    for (int j = 1; j <= cfg.integer("eps-levels"); ++j) eps.push_back(std::ldexp(1.0, -j));
    auto table = estimate_bench(t, pairs, eps);
    Sink out(cfg.text("output"));
    emit_bench(out.get(), table);
    std::fprintf(stderr, "max ratios: b %.4g  c %.4g  d %.4g\n", table.max_b, table.max_c, table.max_d);
    return 0;
}

int cmd_free_check(const RunConfig& cfg) {
    auto f = is_free(build_map(cfg));
    if (f.free)
        std::printf("free  min Gram determinant %.6e\n", f.min_gram_det);
    else
        std::printf("not free (%s)  min Gram determinant %.6e\n", f.reason.c_str(), f.min_gram_det);
    return 0;
}

int dispatch(const RunConfig& cfg) {
    const auto& c = cfg.command;
    if (c == "pullback") return cmd_pullback(cfg);
    if (c == "decompose") return cmd_decompose(cfg);
    if (c == "frame") return cmd_frame(cfg);
    if (c == "stage") return cmd_stage(cfg);
    if (c == "run") return cmd_run(cfg);
    if (c == "flow") return cmd_flow(cfg);
    if (c == "smooth-bench") return cmd_smooth_bench(cfg);
    if (c == "free-check") return cmd_free_check(cfg);
    throw InputError("unknown subcommand '" + c + "'");
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(parse_config(std::vector<std::string>(argv + 1, argv + argc)));
    } catch (const HelpRequested& h) {
        std::cout << h.text;
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
