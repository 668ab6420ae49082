#include "corrugate/c1_driver.hpp"

#include <cmath>
#include <limits>

namespace corrugate {

double IterationSchedule::delta(int q) const { return std::ldexp(1.0, -2 * q); }
double IterationSchedule::eta(int q) const { return std::ldexp(epsilon, -q - 1); }

void IterationSchedule::validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InputError("schedule: epsilon must be positive");
    if (stages < 0) throw InputError("schedule: stage count must be nonnegative");
}

double discretization_slack(const ImmersionField& z) {
    return 10.0 * std::numeric_limits<double>::epsilon() * z.grid().max_res() * sup_norm(pullback_metric(z), 0);
}

namespace {

double sup_abs(const MetricField& m) {
    double worst = 0.0;
    for (std::size_t p = 0; p < m.grid().size(); ++p)
        for (int i = 0; i < m.dim(); ++i)
            for (int j = i; j < m.dim(); ++j) worst = std::max(worst, std::abs(m.at(p, i, j)));
    return worst;
}

}  // namespace

RunResult nash_kuiper_iterate(const ImmersionField& v0, const MetricField& g, const IterationSchedule& schedule,
                              const StageOptions& options, const StageCallback& on_stage) {
    schedule.validate();
    require_same_grid(v0.grid(), g.grid(), "nash_kuiper_iterate");
    for (double e : min_eigenvalues(g))
        if (!(e > 0.0)) throw InputError("target metric is not positive definite");
    if (!is_short(v0, g, true).short_map) throw InputError("initial map is not strictly short");

    RunResult run{v0, g, {}};
    auto& rep = run.report;
    rep.final_defect = sup_abs(g - pullback_metric(v0));
    for (int q = 1; q <= schedule.stages; ++q) {
        StageResult st;
        try {
            st = run_stage(run.u, run.g, schedule.eta(q), schedule.delta(q), options);
        } catch (const Error& e) {
            rep.error = "stage " + std::to_string(q) + ": " + e.what();
            throw RunAborted(e.kind(), rep.error, rep);
        }
        rep.stages.push_back(st.report);
        rep.c1_increments.push_back(st.report.c1_delta);
        rep.c0_sum += st.report.c0_delta;
        rep.slack.push_back(discretization_slack(st.z));
        rep.final_defect = st.report.defect_after;
        run.u = std::move(st.z);
        run.g = std::move(st.g);
        if (on_stage) on_stage(q, StageResult{run.u, run.g, rep.stages.back()});
        if (rep.final_defect > schedule.delta(q) + rep.slack.back()) {
            rep.error = "stage " + std::to_string(q) + ": defect " + std::to_string(rep.final_defect) +
                        " exceeds delta_q " + std::to_string(schedule.delta(q));
            throw RunAborted(ErrorKind::Nonconvergence, rep.error, rep);
        }
    }
    rep.c0_drift = c0_distance(run.u, resample(v0, run.u.grid()));
    return run;
}

CauchyAudit c1_cauchy_audit(const std::vector<double>& inc) {
    if (inc.size() < 3) throw InputError("c1_cauchy_audit: need at least 3 stages");
    CauchyAudit a;
    double log_sum = 0.0;
    for (std::size_t q = 1; q < inc.size(); ++q) {
        const double r = inc[q - 1] > 0.0 ? inc[q] / inc[q - 1] : std::numeric_limits<double>::infinity();
        a.ratios.push_back(r);
        log_sum += std::log(r);
    }
    a.geometric_mean = std::exp(log_sum / a.ratios.size());
    a.pass = a.geometric_mean <= kCauchyRatioGate;
    return a;
}

CauchyAudit c1_cauchy_audit(const RunReport& report) { return c1_cauchy_audit(report.c1_increments); }

}  // namespace corrugate
