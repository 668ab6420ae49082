#pragma once

#include <utility>
#include <vector>

#include "corrugate/grid.hpp"

namespace corrugate {

// m(s): 1 on [0, 1/2], 0 on [1, inf), C4 smootherstep in between.
double smoothing_multiplier(double s);
double smoothing_multiplier_derivative(double s);

// Mode xi scaled by m(eps |xi|).
ScalarField smooth(const ScalarField& t, double eps);
MetricField smooth(const MetricField& t, double eps);
ImmersionField smooth(const ImmersionField& t, double eps);

// Mode xi scaled by |xi| m'(eps |xi|), the eps-derivative of smooth.
ScalarField smooth_eps_derivative(const ScalarField& t, double eps);
MetricField smooth_eps_derivative(const MetricField& t, double eps);
ImmersionField smooth_eps_derivative(const ImmersionField& t, double eps);

enum class EstimateFamily { B, C, D };
char family_name(EstimateFamily f);

struct BenchRow {
    int r = 0, s = 0;
    double eps = 0.0;
    EstimateFamily family = EstimateFamily::B;
    double lhs = 0.0, ratio = 0.0;
};

struct BenchTable {
    std::vector<BenchRow> rows;
    double max_b = 0.0, max_c = 0.0, max_d = 0.0;
    double max_ratio(EstimateFamily f) const;
};

// Ratios of |D^r(...)|_0 to eps^power |T|_s. Family B for r >= s (S T),
// C for all pairs (S' T), D for s >= r (T - S T).
BenchTable estimate_bench(const ScalarField& t, const std::vector<std::pair<int, int>>& pairs,
                          const std::vector<double>& eps);

// sup over nodes of the Frobenius norm of the r-th derivative tensor.
double derivative_sup(const ScalarField& f, int r);

}  // namespace corrugate
