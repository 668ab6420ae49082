#pragma once

#include <string>
#include <vector>

#include "corrugate/fields.hpp"

namespace corrugate {

// Quintic smoothstep: 0 for s <= 0, 1 for s >= 1, C2, psi(1/2) = 1/2.
double psi_ramp(double s);
double psi_ramp_derivative(double s);

struct FlowConfig {
    double t0 = 10.0;
    double t_end = 210.0;
    double dt = 0.05;
    double tol = 1e-3;              // final identity residual
    double smallness = -1.0;        // bound on |h|_3; negative means 0.05 |w0#e|_0
    int divergence_steps = 20;      // consecutive residual increases tolerated
    double divergence_floor = -1.0; // residuals below this are ignored; negative means tol / 10
    void validate() const;
};

// Stored increments E(tau) with trapezoid prefix sums.
class FlowHistory {
public:
    void append(double t, MetricField e);
    std::size_t size() const { return times_.size(); }
    const std::vector<double>& times() const { return times_; }
    // int_{t0}^t E(tau) psi(t - tau) dtau and its t-derivative; E is held
    // constant past the last stored time.
    MetricField integral(double t, const PeriodicGrid& g) const;
    MetricField integral_rate(double t, const PeriodicGrid& g) const;

private:
    MetricField at(double tau) const;  // piecewise linear
    MetricField prefix(double tau) const;
    MetricField window(double t, bool rate, const PeriodicGrid& g) const;

    std::vector<double> times_;
    std::vector<MetricField> e_, prefix_;
};

struct FlowState {
    double t0 = 10.0, t = 10.0;
    ImmersionField w0, w;
    MetricField h_target;
    FlowHistory history;
};

FlowState make_flow_state(const ImmersionField& w0, const MetricField& h_target, double t0);

struct FlowRates {
    MetricField h, hdot, e;
    ImmersionField smoothed, wdot;  // S_{1/t} w and L(S_{1/t} w) hdot
    double orthogonality = 0.0;     // max |d(S w) . wdot|
    double identity = 0.0;          // max |2 d(S w) (.) d wdot - hdot|
};

// h(t) = S_{1/t}[psi(t - t0) h + L(t)] from the stored history.
MetricField flow_h(const FlowState& s, double t);
MetricField flow_hdot(const FlowState& s, double t);
FlowRates flow_rhs(const FlowState& s, double t, const ImmersionField& w);
inline FlowRates flow_rhs(const FlowState& s) { return flow_rhs(s, s.t, s.w); }

struct FlowStep {
    double t = 0.0;
    double hdot_bound = 0.0;   // t^4 |hdot|_0 + |hdot|_4
    double wdot_bound = 0.0;   // t^4 |wdot|_0 + |wdot|_4
    double w_deviation = 0.0;  // |w - w0|_3
    double residual = 0.0;     // |w#e - w0#e - h|_0
    double orthogonality = 0.0, identity = 0.0;
};

struct FlowDiagnostics {
    std::vector<FlowStep> steps;
    bool flagged = false;
    std::string flag_reason;
};

// Length of the run of consecutive increases above floor ending at the last entry.
int rising_run(const std::vector<double>& residuals, double floor);

inline constexpr double kGrowthFlag = 10.0;

// Flags any tracked quantity exceeding 10x its maximum over the ramp window [t0, t0 + 1].
FlowDiagnostics flow_diagnostics(const std::vector<FlowStep>& steps, double t0);

struct FlowResult {
    ImmersionField u;
    FlowDiagnostics diagnostics;
    double final_residual = 0.0;
    bool within_tolerance = false;
};

// Classical RK4 with fixed step; w0 must be free.
FlowResult run_flow(const ImmersionField& w0, const MetricField& h_target, const FlowConfig& cfg = {});

}  // namespace corrugate
