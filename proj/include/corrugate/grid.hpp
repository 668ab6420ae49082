#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <utility>
#include <vector>

namespace corrugate {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

class PeriodicGrid {
public:
    PeriodicGrid() = default;
    explicit PeriodicGrid(int n);   // circle
    PeriodicGrid(int nx, int ny);   // square torus

    int dim() const { return dim_; }
    int res(int axis) const { return res_[axis]; }
    std::size_t size() const { return static_cast<std::size_t>(res_[0]) * res_[1]; }
    double spacing(int axis) const { return kTwoPi / res_[axis]; }
    double coord(int axis, int index) const { return spacing(axis) * index; }
    // Node coordinates of a flat node index (row-major, axis 0 slowest).
    std::array<double, 2> point(std::size_t node) const;
    std::array<int, 2> index(std::size_t node) const {
        return {static_cast<int>(node / res_[1]), static_cast<int>(node % res_[1])};
    }
    std::size_t node(int i, int j = 0) const { return static_cast<std::size_t>(i) * res_[1] + j; }
    int max_res() const { return dim_ == 1 ? res_[0] : std::max(res_[0], res_[1]); }

    PeriodicGrid refined(int factor = 2) const;

    bool operator==(const PeriodicGrid& o) const { return dim_ == o.dim_ && res_ == o.res_; }
    bool operator!=(const PeriodicGrid& o) const { return !(*this == o); }

private:
    int dim_ = 1;
    std::array<int, 2> res_{16, 1};
};

class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const PeriodicGrid& g, double fill = 0.0) : grid_(g), values_(g.size(), fill) {}
    ScalarField(const PeriodicGrid& g, std::vector<double> v);

    const PeriodicGrid& grid() const { return grid_; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

private:
    PeriodicGrid grid_;
    std::vector<double> values_;
};

// Symmetric dim x dim tensor per node, upper triangle stored row by row.
class MetricField {
public:
    MetricField() = default;
    explicit MetricField(const PeriodicGrid& g) : grid_(g), data_(g.size() * components(g.dim()), 0.0) {}

    static int components(int dim) { return dim * (dim + 1) / 2; }
    static int slot(int dim, int i, int j) {
        if (i > j) std::swap(i, j);
        return dim == 1 ? 0 : (i == 0 ? j : 2);
    }

    const PeriodicGrid& grid() const { return grid_; }
    int dim() const { return grid_.dim(); }
    int ncomp() const { return components(grid_.dim()); }
    double& at(std::size_t node, int i, int j) { return data_[node * ncomp() + slot(dim(), i, j)]; }
    double at(std::size_t node, int i, int j) const { return data_[node * ncomp() + slot(dim(), i, j)]; }
    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    // Constant tensor on every node; m is row-major dim x dim.
    static MetricField constant(const PeriodicGrid& g, const std::vector<double>& m);
    static MetricField identity(const PeriodicGrid& g, double scale = 1.0);

    std::vector<double> component(int i, int j) const;
    void set_component(int i, int j, const std::vector<double>& v);

    MetricField& operator+=(const MetricField& o);
    MetricField& operator-=(const MetricField& o);
    MetricField& operator*=(double s);

private:
    PeriodicGrid grid_;
    std::vector<double> data_;
};

MetricField operator+(MetricField a, const MetricField& b);
MetricField operator-(MetricField a, const MetricField& b);
MetricField operator*(double s, MetricField a);

// Map chart -> R^N. values hold the full lift; offsets[a] is the jump of the
// lift across one period along axis a, so values - offsets * x / 2pi is periodic.
class ImmersionField {
public:
    ImmersionField() = default;
    ImmersionField(const PeriodicGrid& g, int N);

    const PeriodicGrid& grid() const { return grid_; }
    int ambient() const { return N_; }
    double* point(std::size_t node) { return values_.data() + node * N_; }
    const double* point(std::size_t node) const { return values_.data() + node * N_; }
    double& at(std::size_t node, int a) { return values_[node * N_ + a]; }
    double at(std::size_t node, int a) const { return values_[node * N_ + a]; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& offset(int axis) { return offsets_[axis]; }
    const std::vector<double>& offset(int axis) const { return offsets_[axis]; }

    // Periodic part of component a.
    std::vector<double> periodic_component(int a) const;
    std::vector<double> component(int a) const;
    // Rebuild values from periodic part of component a plus its linear lift.
    void set_periodic_component(int a, const std::vector<double>& p);

    // Same map viewed in R^(N+extra) through the inclusion R^N -> R^(N+extra).
    ImmersionField embedded(int extra) const;

    ImmersionField& operator+=(const ImmersionField& o);
    ImmersionField& operator*=(double s);

private:
    PeriodicGrid grid_;
    int N_ = 0;
    std::vector<double> values_;
    std::array<std::vector<double>, 2> offsets_;
};

ImmersionField operator+(ImmersionField a, const ImmersionField& b);
ImmersionField operator-(ImmersionField a, const ImmersionField& b);
ImmersionField operator*(double s, ImmersionField a);

void require_same_grid(const PeriodicGrid& a, const PeriodicGrid& b, const char* what);
void require_finite(const std::vector<double>& v, const char* what);

}  // namespace corrugate
