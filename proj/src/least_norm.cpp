#include "corrugate/least_norm.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>

#include "corrugate/errors.hpp"
#include "corrugate/parallel.hpp"

namespace corrugate {

Eigen::VectorXd least_norm_solve(const LinearSystem& sys) {
    const auto& A = sys.A;
    if (A.rows() != sys.v.size()) throw InputError("least_norm_solve: A and v disagree in size");
    if (A.rows() > A.cols()) throw InputError("least_norm_solve: more equations than unknowns");
    if (!A.allFinite() || !sys.v.allFinite()) throw InputError("least_norm_solve: non-finite input");
    const double scale = A.squaredNorm();
    Eigen::MatrixXd M = A * A.transpose();
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success || scale == 0.0) throw SingularityError("least_norm_solve: A A^T is not positive definite");
    Eigen::MatrixXd L = llt.matrixL();
    for (Eigen::Index i = 0; i < L.rows(); ++i)
        if (L(i, i) * L(i, i) <= kPivotFloor * scale)
            throw SingularityError("least_norm_solve: rank deficient (pivot below floor)");
    Eigen::VectorXd omega = A.transpose() * llt.solve(sys.v);
    // one refinement pass
    Eigen::VectorXd r = sys.v - A * omega;
    omega += A.transpose() * llt.solve(r);
    return omega;
}

namespace {

std::vector<Eigen::VectorXd> rows_of(const double* const* ptrs, int count, int N) {
    std::vector<Eigen::VectorXd> out;
    for (int i = 0; i < count; ++i) out.push_back(Eigen::Map<const Eigen::VectorXd>(ptrs[i], N));
    return out;
}

}  // namespace

LinearSystem linearized_system(const std::vector<Eigen::VectorXd>& first,
                               const std::vector<Eigen::VectorXd>& second, const std::vector<double>& hdot) {
    const int n = static_cast<int>(first.size());
    const int m = n * (n + 1) / 2;
    if (second.size() != std::size_t(m) || hdot.size() != std::size_t(m) || n == 0)
        throw InputError("linearized_system: inconsistent sizes");
    const Eigen::Index N = first[0].size();
    LinearSystem s{Eigen::MatrixXd(n + m, N), Eigen::VectorXd::Zero(n + m)};
    for (int j = 0; j < n; ++j) s.A.row(j) = first[j].transpose();
    for (int k = 0; k < m; ++k) {
        s.A.row(n + k) = -2.0 * second[k].transpose();
        s.v(n + k) = hdot[k];
    }
    return s;
}

Freeness is_free(const ImmersionField& w) {
    const auto& g = w.grid();
    const int n = g.dim(), N = w.ambient();
    const int k = n + n * (n + 1) / 2;
    if (N < k) return {false, 0.0, "dimension count: need N >= " + std::to_string(k)};
    auto d = map_derivatives(w, true);
    double min_det = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < g.size(); ++p) {
        Eigen::MatrixXd V(k, N);
        int r = 0;
        for (int i = 0; i < n; ++i) V.row(r++) = Eigen::Map<const Eigen::RowVectorXd>(d.first(p, i), N);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) V.row(r++) = Eigen::Map<const Eigen::RowVectorXd>(d.second(p, i, j), N);
        min_det = std::min(min_det, (V * V.transpose()).determinant());
    }
    Freeness f{min_det > kFreeGramFloor, min_det, ""};
    if (!f.free) f.reason = "Gram determinant below floor";
    return f;
}

double linearization_residual(const MapDerivatives& d, const ImmersionField& wdot, const MetricField& hdot) {
    const auto& g = wdot.grid();
    auto dd = map_derivatives(wdot);
    const int N = d.N;
    double worst = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p)
        for (int i = 0; i < d.dim; ++i)
            for (int j = i; j < d.dim; ++j) {
                double s = 0.0;
                for (int a = 0; a < N; ++a)
                    s += d.first(p, i)[a] * dd.first(p, j)[a] + d.first(p, j)[a] * dd.first(p, i)[a];
                worst = std::max(worst, std::abs(s - hdot.at(p, i, j)));
            }
    return worst;
}

ImmersionField apply_L(const ImmersionField& w, const MetricField& hdot) {
    return apply_L(w, map_derivatives(w, true), hdot);
}

ImmersionField apply_L(const ImmersionField& w, const MapDerivatives& d, const MetricField& hdot) {
    const auto& g = w.grid();
    require_same_grid(g, hdot.grid(), "apply_L");
    require_finite(hdot.data(), "hdot");
    const int n = g.dim(), N = w.ambient();
    if (N < n + n * (n + 1) / 2) throw InputError("apply_L: map cannot be free (dimension count)");
    ImmersionField out(g, N);
    std::atomic<bool> failed{false};
    std::mutex m;
    std::string message;
    parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
        try {
            for (std::size_t p = b; p < e && !failed; ++p) {
                const double* f[2] = {d.first(p, 0), n > 1 ? d.first(p, 1) : nullptr};
                std::vector<const double*> s;
                std::vector<double> h;
                for (int i = 0; i < n; ++i)
                    for (int j = i; j < n; ++j) {
                        s.push_back(d.second(p, i, j));
                        h.push_back(hdot.at(p, i, j));
                    }
                auto sys = linearized_system(rows_of(f, n, N), rows_of(s.data(), int(s.size()), N), h);
                Eigen::VectorXd x = least_norm_solve(sys);
                for (int a = 0; a < N; ++a) out.at(p, a) = x(a);
            }
        } catch (const std::exception& ex) {
            std::lock_guard<std::mutex> lock(m);
            if (!failed.exchange(true)) message = ex.what();
        }
    });
    if (failed) throw SingularityError("apply_L: map is not free at some node: " + message);
    const double res = linearization_residual(d, out, hdot);
    const double tol = kConsistencyTolerance * std::max(1.0, sup_norm(hdot, 0));
    if (!(res <= tol))
        throw ConsistencyError("apply_L: linearization residual " + std::to_string(res) +
                               " exceeds tolerance; grid too coarse");
    return out;
}

}  // namespace corrugate
