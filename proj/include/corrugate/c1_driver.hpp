#pragma once

#include <functional>
#include <string>
#include <vector>

#include "corrugate/corrugation.hpp"
#include "corrugate/errors.hpp"

namespace corrugate {

struct IterationSchedule {
    double epsilon = 0.5;
    int stages = 4;  // 0 runs nothing

    double delta(int q) const;  // 4^-q
    double eta(int q) const;    // 2^(-q-1) epsilon
    void validate() const;
};

struct RunReport {
    std::vector<StageReport> stages;
    std::vector<double> slack;          // per stage, added to delta_q in the defect gate
    std::vector<double> c1_increments;  // |D v_q - D v_(q-1)|_0
    double final_defect = 0.0;
    double c0_drift = 0.0;              // |u - v0|_0
    double c0_sum = 0.0;                // sum of |v_q - v_(q-1)|_0
    std::string error;                  // set when a stage aborted the run
};

// Raised when a stage fails; carries the stages completed so far.
class RunAborted : public Error {
public:
    RunAborted(ErrorKind kind, const std::string& what, RunReport partial)
        : Error(kind, what), partial_(std::move(partial)) {}
    const RunReport& partial() const noexcept { return partial_; }

private:
    RunReport partial_;
};

struct RunResult {
    ImmersionField u;
    MetricField g;  // target on u's grid
    RunReport report;
};

using StageCallback = std::function<void(int q, const StageResult&)>;

// 10 * machine epsilon * max resolution * |z#e|_0.
double discretization_slack(const ImmersionField& z);

RunResult nash_kuiper_iterate(const ImmersionField& v0, const MetricField& g, const IterationSchedule& schedule,
                              const StageOptions& options = {}, const StageCallback& on_stage = {});

struct CauchyAudit {
    std::vector<double> ratios;  // inc[q] / inc[q-1] for q >= 2
    double geometric_mean = 0.0;
    bool pass = false;
};

inline constexpr double kCauchyRatioGate = 0.75;

CauchyAudit c1_cauchy_audit(const std::vector<double>& increments);
CauchyAudit c1_cauchy_audit(const RunReport& report);

}  // namespace corrugate
