#include "corrugate/grid.hpp"

#include <cmath>
#include <string>

#include "corrugate/errors.hpp"

namespace corrugate {

namespace {

void check_res(int n) {
    if (n < 16 || (n & (n - 1)) != 0)
        throw InputError("grid resolution must be a power of two >= 16, got " + std::to_string(n));
}

}  // namespace

PeriodicGrid::PeriodicGrid(int n) : dim_(1), res_{n, 1} { check_res(n); }

PeriodicGrid::PeriodicGrid(int nx, int ny) : dim_(2), res_{nx, ny} {
    check_res(nx);
    check_res(ny);
}

std::array<double, 2> PeriodicGrid::point(std::size_t node) const {
    auto [i, j] = index(node);
    return {coord(0, i), dim_ == 2 ? coord(1, j) : 0.0};
}

PeriodicGrid PeriodicGrid::refined(int factor) const {
    return dim_ == 1 ? PeriodicGrid(res_[0] * factor) : PeriodicGrid(res_[0] * factor, res_[1] * factor);
}

ScalarField::ScalarField(const PeriodicGrid& g, std::vector<double> v) : grid_(g), values_(std::move(v)) {
    if (values_.size() != g.size()) throw InputError("scalar field size does not match grid");
}

MetricField MetricField::constant(const PeriodicGrid& g, const std::vector<double>& m) {
    const int d = g.dim();
    if (static_cast<int>(m.size()) != d * d) throw InputError("constant metric needs dim*dim entries");
    MetricField f(g);
    for (std::size_t p = 0; p < g.size(); ++p)
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j) f.at(p, i, j) = 0.5 * (m[i * d + j] + m[j * d + i]);
    return f;
}

MetricField MetricField::identity(const PeriodicGrid& g, double scale) {
    std::vector<double> m(g.dim() * g.dim(), 0.0);
    for (int i = 0; i < g.dim(); ++i) m[i * g.dim() + i] = scale;
    return constant(g, m);
}

std::vector<double> MetricField::component(int i, int j) const {
    std::vector<double> v(grid_.size());
    for (std::size_t p = 0; p < v.size(); ++p) v[p] = at(p, i, j);
    return v;
}

void MetricField::set_component(int i, int j, const std::vector<double>& v) {
    for (std::size_t p = 0; p < v.size(); ++p) at(p, i, j) = v[p];
}

MetricField& MetricField::operator+=(const MetricField& o) {
    require_same_grid(grid_, o.grid_, "metric sum");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
}

MetricField& MetricField::operator-=(const MetricField& o) {
    require_same_grid(grid_, o.grid_, "metric difference");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
}

MetricField& MetricField::operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
}

MetricField operator+(MetricField a, const MetricField& b) { return a += b; }
MetricField operator-(MetricField a, const MetricField& b) { return a -= b; }
MetricField operator*(double s, MetricField a) { return a *= s; }

ImmersionField::ImmersionField(const PeriodicGrid& g, int N) : grid_(g), N_(N), values_(g.size() * N, 0.0) {
    if (N < 1) throw InputError("ambient dimension must be positive");
    offsets_[0].assign(N, 0.0);
    offsets_[1].assign(N, 0.0);
}

std::vector<double> ImmersionField::component(int a) const {
    std::vector<double> v(grid_.size());
    for (std::size_t p = 0; p < v.size(); ++p) v[p] = at(p, a);
    return v;
}

std::vector<double> ImmersionField::periodic_component(int a) const {
    std::vector<double> v(grid_.size());
    for (std::size_t p = 0; p < v.size(); ++p) {
        auto x = grid_.point(p);
        double lin = 0.0;
        for (int ax = 0; ax < grid_.dim(); ++ax) lin += offsets_[ax][a] * x[ax] / kTwoPi;
        v[p] = at(p, a) - lin;
    }
    return v;
}

void ImmersionField::set_periodic_component(int a, const std::vector<double>& per) {
    for (std::size_t p = 0; p < per.size(); ++p) {
        auto x = grid_.point(p);
        double lin = 0.0;
        for (int ax = 0; ax < grid_.dim(); ++ax) lin += offsets_[ax][a] * x[ax] / kTwoPi;
        at(p, a) = per[p] + lin;
    }
}

ImmersionField ImmersionField::embedded(int extra) const {
    if (extra < 0) throw InputError("cannot embed into a smaller space");
    ImmersionField out(grid_, N_ + extra);
    for (std::size_t p = 0; p < grid_.size(); ++p)
        for (int a = 0; a < N_; ++a) out.at(p, a) = at(p, a);
    for (int ax = 0; ax < 2; ++ax)
        for (int a = 0; a < N_; ++a) out.offsets_[ax][a] = offsets_[ax][a];
    return out;
}

ImmersionField& ImmersionField::operator+=(const ImmersionField& o) {
    require_same_grid(grid_, o.grid_, "map sum");
    if (N_ != o.N_) throw InputError("map sum: ambient dimensions differ");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
    for (int ax = 0; ax < 2; ++ax)
        for (int a = 0; a < N_; ++a) offsets_[ax][a] += o.offsets_[ax][a];
    return *this;
}

ImmersionField& ImmersionField::operator*=(double s) {
    for (double& x : values_) x *= s;
    for (auto& off : offsets_)
        for (double& x : off) x *= s;
    return *this;
}

ImmersionField operator+(ImmersionField a, const ImmersionField& b) { return a += b; }
ImmersionField operator-(ImmersionField a, const ImmersionField& b) { return a += (-1.0) * b; }
ImmersionField operator*(double s, ImmersionField a) { return a *= s; }

void require_same_grid(const PeriodicGrid& a, const PeriodicGrid& b, const char* what) {
    if (a != b) throw InputError(std::string(what) + ": grid mismatch");
}

void require_finite(const std::vector<double>& v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x)) throw InputError(std::string(what) + ": non-finite value");
}

}  // namespace corrugate
