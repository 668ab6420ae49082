#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "corrugate/fields.hpp"
#include "corrugate/normal_frame.hpp"
#include "corrugate/primitive_decomp.hpp"

namespace corrugate {

struct SpiralParams {
    double lambda = 8.0;
    double eta_budget = std::numeric_limits<double>::infinity();
    double delta_budget = std::numeric_limits<double>::infinity();
};

inline constexpr int kSamplesPerPeriod = 16;

// Resolution per axis needed to resolve cos(lambda psi) with 16 samples per period.
std::array<int, 2> required_resolution(const PrimitiveMetric& prim, double lambda);

// (a/lambda)(nu cos(lambda psi) + b sin(lambda psi)).
ImmersionField spiral_perturbation(const ImmersionField& w, const PrimitiveMetric& prim, const FramePair& frame,
                                   double lambda);

struct EstimateCheck {
    double c0 = 0.0;         // ||w_next - w_prev||_0
    double c1_squared = 0.0; // ||D(w_next - w_prev)||_0^2
    double increment = 0.0;  // ||w_next#e - w_prev#e - a^2 dpsi dpsi||_0
    bool c0_ok = true, c1_ok = true, increment_ok = true;
    bool pass() const { return c0_ok && c1_ok && increment_ok; }
    std::string describe() const;
};

// h_norm feeds the bound ||Dw^p||^2 < 2 ||h||_0; infinity disables it.
EstimateCheck check_stage_estimates(const ImmersionField& w_prev, const ImmersionField& w_next,
                                    const PrimitiveMetric& prim, double eta_budget, double delta_budget,
                                    double h_norm = std::numeric_limits<double>::infinity());

struct LambdaSearch {
    double lambda0 = 8.0;
    double cap = 16384.0;
    std::size_t max_field_doubles = std::size_t(1) << 25;
};

struct LambdaChoice {
    SpiralParams params;
    EstimateCheck check;
    ImmersionField w;          // input map on the grid finally used
    PrimitiveMetric prim;      // primitive on that grid
    ImmersionField increment;  // w^p at the chosen lambda
};

// Doubling search from lambda0; refines the grid when 16 samples per period fail.
LambdaChoice choose_lambda(const ImmersionField& w, const PrimitiveMetric& prim, const FramePair& frame,
                           const SpiralParams& budgets, double h_norm = std::numeric_limits<double>::infinity(),
                           const LambdaSearch& search = {});

struct StageOptions {
    int bump_count = 2;  // patches per axis
    LambdaSearch search;
};

struct StageReport {
    double eta = 0.0, delta = 0.0, delta0 = 0.0;
    double c0_delta = 0.0, c1_delta = 0.0;
    double defect_before = 0.0, defect_after = 0.0;
    double margin_after = 0.0;
    double min_separation = 0.0;  // injectivity diagnostic
    int primitives = 0;
    std::array<int, 2> resolution{0, 0};
    std::vector<double> lambdas;
};

struct StageResult {
    ImmersionField z;
    MetricField g;  // target metric on z's grid
    StageReport report;
};

StageResult run_stage(const ImmersionField& w, const MetricField& g, double eta, double delta,
                      const StageOptions& options = {});

// Sup over nodes of the Frobenius norm of D(u - v).
double c1_distance(const ImmersionField& u, const ImmersionField& v);
double c0_distance(const ImmersionField& u, const ImmersionField& v);
// Smallest ambient distance between sampled nodes whose chart distance is at least pi/2.
double min_separation(const ImmersionField& w, std::size_t max_samples = 2048);

}  // namespace corrugate
