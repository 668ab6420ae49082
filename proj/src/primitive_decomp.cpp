#include "corrugate/primitive_decomp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "corrugate/errors.hpp"
#include "corrugate/fields.hpp"

namespace corrugate {

namespace {

struct SortedEigen {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};

// Descending eigenvalues (stable on ties); each eigenvector's first nonzero
// component made positive.
SortedEigen sorted_eigen(const Eigen::MatrixXd& M, const char* name) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    const int n = static_cast<int>(M.rows());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return es.eigenvalues()(a) > es.eigenvalues()(b); });
    SortedEigen out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
    for (int k = 0; k < n; ++k) {
        const double lam = es.eigenvalues()(order[k]);
        if (!(lam > 1e-10))
            throw InputError(std::string("congruence_match: ") + name + " is not positive definite (eigenvalue " +
                             std::to_string(lam) + ")");
        Eigen::VectorXd v = es.eigenvectors().col(order[k]);
        for (int i = 0; i < n; ++i)
            if (std::abs(v(i)) > 1e-14) {
                if (v(i) < 0) v = -v;
                break;
            }
        out.values(k) = lam;
        out.vectors.col(k) = v;
    }
    return out;
}

double wrap(double d) {
    d = std::fmod(d + kTwoPi / 2, kTwoPi);
    if (d < 0) d += kTwoPi;
    return d - kTwoPi / 2;
}

std::size_t nearest_node(const PeriodicGrid& g, const std::array<double, 2>& c) {
    int idx[2] = {0, 0};
    for (int a = 0; a < g.dim(); ++a) {
        int i = static_cast<int>(std::lround(c[a] / g.spacing(a)));
        idx[a] = ((i % g.res(a)) + g.res(a)) % g.res(a);
    }
    return g.node(idx[0], idx[1]);
}

// alpha_i(x) = L_i(L^{-T} h(x) L^{-1}) expressed through q_j = L^{-1} v_j.
struct AlphaEvaluator {
    const RankOneBasis* basis;
    std::vector<Eigen::VectorXd> q;

    AlphaEvaluator(const RankOneBasis& b, const Eigen::MatrixXd& L) : basis(&b) {
        Eigen::MatrixXd Linv = L.inverse();
        for (auto& v : b.v) q.push_back(Linv * v);
    }
    void operator()(const MetricField& h, std::size_t p, std::vector<double>& alpha) const {
        const int J = basis->size(), n = h.dim();
        std::vector<double> quad(J);
        for (int j = 0; j < J; ++j) {
            double s = 0.0;
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) s += q[j](a) * h.at(p, a, b) * q[j](b);
            quad[j] = s;
        }
        alpha.assign(J, 0.0);
        for (int i = 0; i < J; ++i)
            for (int j = 0; j < J; ++j) alpha[i] += basis->gram_inverse(i, j) * quad[j];
    }
};

}  // namespace

MetricField PrimitiveMetric::tensor() const {
    const auto& g = a.grid();
    MetricField m(g);
    for (std::size_t p = 0; p < g.size(); ++p) {
        const double a2 = a[p] * a[p];
        for (int i = 0; i < g.dim(); ++i)
            for (int j = i; j < g.dim(); ++j) m.at(p, i, j) = a2 * dpsi[i] * dpsi[j];
    }
    return m;
}

double PrimitiveMetric::psi_at(const std::array<double, 2>& x) const {
    double s = 0.0;
    for (int a = 0; a < 2; ++a) {
        const double d = psi_wrapped ? wrap(x[a] - psi_origin[a]) : x[a] - psi_origin[a];
        s += dpsi[a] * d;
    }
    return s;
}

PrimitiveMetric resample(const PrimitiveMetric& p, const PeriodicGrid& to) {
    PrimitiveMetric out = p;
    out.a = resample(p.a, to);
    for (double& v : out.a.values()) v = std::max(v, 0.0);
    out.psi = ScalarField(to);
    for (std::size_t k = 0; k < to.size(); ++k) out.psi[k] = out.psi_at(to.point(k));
    return out;
}

MetricField reconstruct(const std::vector<PrimitiveMetric>& prims, const PeriodicGrid& g) {
    MetricField sum(g);
    for (auto& pr : prims) sum += pr.tensor();
    return sum;
}

std::vector<int> active_count(const std::vector<PrimitiveMetric>& prims, const PeriodicGrid& g) {
    std::vector<int> c(g.size(), 0);
    for (auto& pr : prims)
        for (std::size_t p = 0; p < g.size(); ++p) c[p] += pr.a[p] > 0.0;
    return c;
}

double RankOneBasis::functional(int i, const Eigen::MatrixXd& M) const {
    double s = 0.0;
    for (int j = 0; j < size(); ++j) s += gram_inverse(i, j) * v[j].dot(M * v[j]);
    return s;
}

Eigen::MatrixXd RankOneBasis::sum_of_squares() const {
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
    for (auto& x : v) S += x * x.transpose();
    return S;
}

RankOneBasis rank_one_basis(int n) {
    if (n != 1 && n != 2) throw CapabilityError("rank-one basis is available for n = 1, 2");
    RankOneBasis b;
    b.n = n;
    for (int i = 0; i < n; ++i) b.v.push_back(Eigen::VectorXd::Unit(n, i));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            b.v.push_back((Eigen::VectorXd::Unit(n, i) + Eigen::VectorXd::Unit(n, j)) / std::sqrt(2.0));
    const int J = b.size();
    Eigen::MatrixXd G(J, J);
    for (int i = 0; i < J; ++i)
        for (int j = 0; j < J; ++j) G(i, j) = std::pow(b.v[i].dot(b.v[j]), 2);
    b.gram_inverse = G.inverse();
    return b;
}

Eigen::MatrixXd congruence_match(const Eigen::MatrixXd& M, const Eigen::MatrixXd& Mprime) {
    if (M.rows() != M.cols() || Mprime.rows() != M.rows() || Mprime.cols() != M.cols())
        throw InputError("congruence_match: shape mismatch");
    auto e = sorted_eigen(0.5 * (M + M.transpose()), "M");
    auto e1 = sorted_eigen(0.5 * (Mprime + Mprime.transpose()), "M'");
    Eigen::MatrixXd U = e.vectors * e.values.cwiseSqrt().cwiseInverse().asDiagonal();
    Eigen::MatrixXd U1 = e1.vectors * e1.values.cwiseSqrt().cwiseInverse().asDiagonal();
    return U1 * U.inverse();
}

Eigen::MatrixXd tensor_at(const MetricField& h, std::size_t node) {
    const int n = h.dim();
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = h.at(node, i, j);
    return M;
}

std::vector<double> PointwiseDecomposition::alpha_at(std::size_t node) const {
    if (!valid[node]) throw CoverageError("node " + std::to_string(node) + " lies outside the validity region");
    std::vector<double> out;
    for (auto& f : alpha) out.push_back(f[node]);
    return out;
}

PointwiseDecomposition pointwise_decompose(const MetricField& h, std::size_t center) {
    const auto& g = h.grid();
    if (center >= g.size()) throw InputError("pointwise_decompose: center node out of range");
    const auto basis = rank_one_basis(g.dim());
    const int J = basis.size();
    PointwiseDecomposition out;
    out.L = congruence_match(tensor_at(h, center), basis.sum_of_squares());
    for (auto& v : basis.v) out.u.push_back(out.L.transpose() * v);
    AlphaEvaluator eval(basis, out.L);
    out.alpha.assign(J, ScalarField(g));
    out.valid.assign(g.size(), 0);
    std::vector<double> al;
    for (std::size_t p = 0; p < g.size(); ++p) {
        eval(h, p, al);
        bool ok = true;
        for (int i = 0; i < J; ++i) {
            out.alpha[i][p] = al[i];
            ok = ok && al[i] > 0.0;
        }
        out.valid[p] = ok;
    }
    for (int i = 0; i < J; ++i) {
        PrimitiveMetric pr;
        pr.a = ScalarField(g);
        pr.psi = ScalarField(g);
        pr.id = i;
        for (int ax = 0; ax < g.dim(); ++ax) pr.dpsi[ax] = out.u[i](ax);
        for (std::size_t p = 0; p < g.size(); ++p) {
            auto x = g.point(p);
            pr.a[p] = out.valid[p] ? std::sqrt(out.alpha[i][p]) : 0.0;
            pr.psi[p] = pr.dpsi[0] * x[0] + pr.dpsi[1] * x[1];
        }
        out.primitives.push_back(std::move(pr));
    }
    return out;
}

double Patch::bump(const PeriodicGrid& g, const std::array<double, 2>& x) const {
    if (whole_chart) return 1.0;
    auto d = displacement(g, x);
    double b = 1.0;
    for (int a = 0; a < g.dim(); ++a) {
        const double r = d[a] / radius[a];
        if (std::abs(r) >= 1.0) return 0.0;
        b *= std::pow(1.0 - r * r, 4);
    }
    return b;
}

std::array<double, 2> Patch::displacement(const PeriodicGrid& g, const std::array<double, 2>& x) const {
    std::array<double, 2> d{0.0, 0.0};
    for (int a = 0; a < g.dim(); ++a) d[a] = whole_chart ? x[a] - center[a] : wrap(x[a] - center[a]);
    return d;
}

std::vector<Patch> brick_lattice(int dim, int count) {
    if (count < 1) throw InputError("bump count must be positive");
    if (count == 1) {
        Patch p;
        p.whole_chart = true;
        return {p};
    }
    if (dim == 2 && count % 2) throw InputError("2-D brick lattice needs an even bump count");
    const double cell = kTwoPi / count;
    std::vector<Patch> out;
    if (dim == 1) {
        for (int l = 0; l < count; ++l) {
            Patch p;
            p.center = {(l + 0.5) * cell, 0.0};
            p.radius = {0.9 * cell, 0.0};
            out.push_back(p);
        }
        return out;
    }
    for (int r = 0; r < count; ++r)
        for (int l = 0; l < count; ++l) {
            Patch p;
            p.center = {std::fmod((l + 0.5 + 0.5 * (r % 2)) * cell, kTwoPi), (r + 0.5) * cell};
            p.radius = {0.74 * cell, 0.9 * cell};
            out.push_back(p);
        }
    return out;
}

GlobalDecomposition global_decompose_patches(const MetricField& h, int bump_count) {
    const auto& g = h.grid();
    const auto basis = rank_one_basis(g.dim());
    const int J = basis.size();
    GlobalDecomposition out;
    out.patches = brick_lattice(g.dim(), bump_count);
    const std::size_t P = out.patches.size();

    struct Local {
        Eigen::MatrixXd L;
        std::vector<Eigen::VectorXd> u;
        std::vector<std::size_t> nodes;
        std::vector<std::vector<double>> alpha;  // per support node
    };
    std::vector<Local> local(P);
    std::vector<double> al;
    for (std::size_t l = 0; l < P; ++l) {
        Patch& patch = out.patches[l];
        const auto p0 = patch.whole_chart ? std::size_t(0) : nearest_node(g, patch.center);
        if (patch.whole_chart) patch.center = g.point(0);
        Local& loc = local[l];
        loc.L = congruence_match(tensor_at(h, p0), basis.sum_of_squares());
        for (auto& v : basis.v) loc.u.push_back(loc.L.transpose() * v);
        AlphaEvaluator eval(basis, loc.L);
        const auto base = patch.radius;
        bool accepted = false;
        double worst = 0.0;
        for (int shrink = 0; shrink <= 5 && !accepted; ++shrink) {
            if (patch.whole_chart && shrink > 0) break;
            for (int a = 0; a < 2; ++a) patch.radius[a] = base[a] * std::pow(0.8, shrink);
            loc.nodes.clear();
            loc.alpha.clear();
            worst = std::numeric_limits<double>::infinity();
            for (std::size_t p = 0; p < g.size(); ++p) {
                if (patch.bump(g, g.point(p)) <= 0.0) continue;
                eval(h, p, al);
                for (double x : al) worst = std::min(worst, x);
                loc.nodes.push_back(p);
                loc.alpha.push_back(al);
            }
            accepted = worst > kAlphaFloor;
        }
        if (!accepted)
            throw CoverageError("patch " + std::to_string(l) + " has min alpha " + std::to_string(worst) +
                                " <= 0.05; retry with bump count " + std::to_string(2 * bump_count));
    }

    std::vector<double> beta_sq(g.size(), 0.0);
    for (auto& patch : out.patches)
        for (std::size_t p = 0; p < g.size(); ++p) beta_sq[p] += std::pow(patch.bump(g, g.point(p)), 2);
    for (std::size_t p = 0; p < g.size(); ++p)
        if (!(beta_sq[p] > 0.0))
            throw CoverageError("shrunken patches leave node " + std::to_string(p) + " uncovered; retry with bump count " +
                                std::to_string(2 * bump_count));

    for (std::size_t l = 0; l < P; ++l) {
        const Patch& patch = out.patches[l];
        for (int i = 0; i < J; ++i) {
            PrimitiveMetric pr;
            pr.a = ScalarField(g);
            pr.psi = ScalarField(g);
            pr.support_id = static_cast<int>(l);
            pr.psi_origin = patch.center;
            pr.psi_wrapped = !patch.whole_chart;
            pr.id = static_cast<int>(l) * J + i;
            for (int ax = 0; ax < g.dim(); ++ax) pr.dpsi[ax] = local[l].u[i](ax);
            for (std::size_t k = 0; k < local[l].nodes.size(); ++k) {
                const std::size_t p = local[l].nodes[k];
                auto x = g.point(p);
                const double phi = patch.bump(g, x) / std::sqrt(beta_sq[p]);
                auto d = patch.displacement(g, x);
                pr.a[p] = phi * std::sqrt(local[l].alpha[k][i]);
                pr.psi[p] = pr.dpsi[0] * d[0] + pr.dpsi[1] * d[1];
            }
            out.primitives.push_back(std::move(pr));
        }
    }
    return out;
}

std::vector<PrimitiveMetric> global_decompose(const MetricField& h, int bump_count) {
    return global_decompose_patches(h, bump_count).primitives;
}

}  // namespace corrugate
