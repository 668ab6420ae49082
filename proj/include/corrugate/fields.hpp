#pragma once

#include <array>
#include <vector>

#include "corrugate/grid.hpp"

namespace corrugate {

// First and second partials of a map, node-major (node * N + a).
struct MapDerivatives {
    int dim = 0, N = 0;
    std::array<std::vector<double>, 2> d1;
    std::array<std::vector<double>, 3> d2;  // slots (0,0), (0,1), (1,1) as in MetricField

    const double* first(std::size_t node, int i) const { return d1[i].data() + node * N; }
    const double* second(std::size_t node, int i, int j) const {
        return d2[MetricField::slot(dim, i, j)].data() + node * N;
    }
};

MapDerivatives map_derivatives(const ImmersionField& w, bool second_order = false);

MetricField pullback_metric(const ImmersionField& w);
MetricField pullback_metric(const MapDerivatives& d, const PeriodicGrid& g);

inline constexpr int kMaxNormOrder = 4;

double sup_norm(const ScalarField& f, int k);
double sup_norm(const MetricField& f, int k);
double sup_norm(const ImmersionField& f, int k);

struct Shortness {
    bool short_map;
    double margin;
};

inline constexpr double kShortTolerance = 1e-9;

Shortness is_short(const ImmersionField& w, const MetricField& g, bool strict);
// Smallest eigenvalue of the tensor at every node.
std::vector<double> min_eigenvalues(const MetricField& m);

ScalarField resample(const ScalarField& f, const PeriodicGrid& to);
MetricField resample(const MetricField& f, const PeriodicGrid& to);
ImmersionField resample(const ImmersionField& f, const PeriodicGrid& to);

// Common test and CLI maps.
ImmersionField clifford_map(const PeriodicGrid& g, double r);
ImmersionField flat_strip(const PeriodicGrid& g, int N = 4);
ImmersionField circle_map(const PeriodicGrid& g, double r = 1.0, int N = 2);

}  // namespace corrugate
