#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "corrugate/fields.hpp"

namespace corrugate {

struct LinearSystem {
    Eigen::MatrixXd A;  // k x kappa, k <= kappa
    Eigen::VectorXd v;
};

inline constexpr double kPivotFloor = 1e-12;

// A^T (A A^T)^{-1} v.
Eigen::VectorXd least_norm_solve(const LinearSystem& sys);

struct Freeness {
    bool free = false;
    double min_gram_det = 0.0;
    std::string reason;
};

inline constexpr double kFreeGramFloor = 1e-10;

// Gram determinant of the first and second partials at every node.
Freeness is_free(const ImmersionField& w);

// Rows d_j w, then -2 d_ij w for i <= j; right side (0, hdot_ij).
LinearSystem linearized_system(const std::vector<Eigen::VectorXd>& first,
                               const std::vector<Eigen::VectorXd>& second, const std::vector<double>& hdot);

inline constexpr double kConsistencyTolerance = 1e-6;

// Nodewise minimum-norm wdot with wdot . dw = 0 and 2 dw (.) dwdot = hdot.
ImmersionField apply_L(const ImmersionField& w, const MetricField& hdot);
ImmersionField apply_L(const ImmersionField& w, const MapDerivatives& d, const MetricField& hdot);

// sup over nodes of |2 dw (.) dwdot - hdot|.
double linearization_residual(const MapDerivatives& d, const ImmersionField& wdot, const MetricField& hdot);

}  // namespace corrugate
