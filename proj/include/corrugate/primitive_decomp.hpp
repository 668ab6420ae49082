#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

#include "corrugate/grid.hpp"

namespace corrugate {

// a^2 dpsi (x) dpsi. psi is affine on the support of a: its node values are
// stored together with the constant gradient dpsi.
struct PrimitiveMetric {
    ScalarField a;
    ScalarField psi;
    std::array<double, 2> dpsi{0.0, 0.0};
    std::array<double, 2> psi_origin{0.0, 0.0};  // psi = dpsi . (x - origin)
    bool psi_wrapped = false;                    // displacement taken as the minimal image
    int support_id = 0;                          // patch index
    int id = 0;

    MetricField tensor() const;
    double psi_at(const std::array<double, 2>& x) const;
};

// Amplitude interpolated spectrally (clamped at 0), psi re-evaluated.
PrimitiveMetric resample(const PrimitiveMetric& p, const PeriodicGrid& to);

MetricField reconstruct(const std::vector<PrimitiveMetric>& prims, const PeriodicGrid& g);
// Number of primitives with a > 0 at each node.
std::vector<int> active_count(const std::vector<PrimitiveMetric>& prims, const PeriodicGrid& g);

struct RankOneBasis {
    int n = 0;
    std::vector<Eigen::VectorXd> v;
    Eigen::MatrixXd gram_inverse;

    int size() const { return static_cast<int>(v.size()); }
    double functional(int i, const Eigen::MatrixXd& M) const;
    Eigen::MatrixXd sum_of_squares() const;
};

RankOneBasis rank_one_basis(int n);

// L with L^T M' L = M.
Eigen::MatrixXd congruence_match(const Eigen::MatrixXd& M, const Eigen::MatrixXd& Mprime);

inline int overlap_bound(int n) { return n * (n + 1) * (n + 1) / 2; }

struct PointwiseDecomposition {
    Eigen::MatrixXd L;
    std::vector<Eigen::VectorXd> u;        // dpsi_i = L^T v_i
    std::vector<ScalarField> alpha;
    std::vector<PrimitiveMetric> primitives;  // a_i = sqrt(alpha_i) where every alpha_i > 0, else 0
    std::vector<std::uint8_t> valid;

    // alpha_i at a node; throws CoverageError outside the validity region.
    std::vector<double> alpha_at(std::size_t node) const;
};

// Tensor at one node as a dense matrix.
Eigen::MatrixXd tensor_at(const MetricField& h, std::size_t node);

PointwiseDecomposition pointwise_decompose(const MetricField& h, std::size_t center);

struct Patch {
    std::array<double, 2> center{0.0, 0.0};
    std::array<double, 2> radius{0.0, 0.0};
    bool whole_chart = false;

    // Bump value at x, zero outside the support.
    double bump(const PeriodicGrid& g, const std::array<double, 2>& x) const;
    // Minimal-image displacement x - center per axis.
    std::array<double, 2> displacement(const PeriodicGrid& g, const std::array<double, 2>& x) const;
};

// Brick lattice with `count` patches per axis (odd rows shifted by half a brick).
// Supports overlap so that at most dim + 1 patches meet at any point.
std::vector<Patch> brick_lattice(int dim, int count);

inline constexpr double kAlphaFloor = 0.05;

struct GlobalDecomposition {
    std::vector<Patch> patches;
    std::vector<PrimitiveMetric> primitives;
};

GlobalDecomposition global_decompose_patches(const MetricField& h, int bump_count);
std::vector<PrimitiveMetric> global_decompose(const MetricField& h, int bump_count);

}  // namespace corrugate
