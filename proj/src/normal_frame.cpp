#include "corrugate/normal_frame.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "corrugate/errors.hpp"

namespace corrugate {

namespace {

constexpr double kTie = 1e-9;

// Orthonormal tangent basis at one node, columns stored contiguously.
struct Tangent {
    int N = 0, dim = 0;
    std::vector<double> q;  // dim columns of length N

    Tangent(const MapDerivatives& d, std::size_t p) : N(d.N), dim(d.dim), q(std::size_t(d.N) * d.dim) {
        for (int i = 0; i < dim; ++i) {
            double* c = q.data() + i * N;
            const double* src = d.first(p, i);
            std::copy(src, src + N, c);
            for (int k = 0; k < i; ++k) {
                const double* o = q.data() + k * N;
                double s = 0.0;
                for (int a = 0; a < N; ++a) s += c[a] * o[a];
                for (int a = 0; a < N; ++a) c[a] -= s * o[a];
            }
            double n = 0.0;
            for (int a = 0; a < N; ++a) n += c[a] * c[a];
            n = std::sqrt(n);
            if (!(n > 1e-12)) throw PropagationError("map is not an immersion at node " + std::to_string(p));
            for (int a = 0; a < N; ++a) c[a] /= n;
        }
    }
    void project(std::vector<double>& v) const {
        for (int k = 0; k < dim; ++k) {
            const double* o = q.data() + k * N;
            double s = 0.0;
            for (int a = 0; a < N; ++a) s += v[a] * o[a];
            for (int a = 0; a < N; ++a) v[a] -= s * o[a];
        }
    }
    double axis_residual(int a) const {
        double s = 1.0;
        for (int k = 0; k < dim; ++k) s -= q[k * N + a] * q[k * N + a];
        return std::sqrt(std::max(0.0, s));
    }
};

double dot(const std::vector<double>& u, const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t a = 0; a < u.size(); ++a) s += u[a] * v[a];
    return s;
}

void normalize(std::vector<double>& v) {
    const double n = std::sqrt(dot(v, v));
    for (double& x : v) x /= n;
}

struct Sweep {
    std::vector<std::size_t> order;  // nodes in visiting order
    std::vector<long> parent;        // index into order, -1 for the seed
};

Sweep full_sweep(const PeriodicGrid& g) {
    Sweep s;
    const int n0 = g.res(0), n1 = g.res(1);
    for (int i = 0; i < n0; ++i)
        for (int j = 0; j < n1; ++j) {
            s.order.push_back(g.node(i, j));
            if (g.dim() == 1) s.parent.push_back(i == 0 ? -1 : i - 1);
            else if (j > 0) s.parent.push_back(long(i) * n1 + j - 1);
            else s.parent.push_back(i == 0 ? -1 : long(i - 1) * n1);
        }
    return s;
}

Sweep patch_sweep(const PeriodicGrid& g, const Patch& patch) {
    if (patch.whole_chart) return full_sweep(g);
    int start[2] = {0, 0}, count[2] = {1, 1};
    for (int a = 0; a < g.dim(); ++a) {
        const double h = g.spacing(a);
        int lo = static_cast<int>(std::ceil((patch.center[a] - patch.radius[a]) / h));
        int hi = static_cast<int>(std::floor((patch.center[a] + patch.radius[a]) / h));
        if (lo * h <= patch.center[a] - patch.radius[a]) ++lo;
        if (hi * h >= patch.center[a] + patch.radius[a]) --hi;
        start[a] = lo;
        count[a] = std::min(hi - lo + 1, g.res(a));
    }
    Sweep s;
    for (int i = 0; i < count[0]; ++i)
        for (int j = 0; j < count[1]; ++j) {
            const int gi = ((start[0] + i) % g.res(0) + g.res(0)) % g.res(0);
            const int gj = g.dim() == 2 ? ((start[1] + j) % g.res(1) + g.res(1)) % g.res(1) : 0;
            s.order.push_back(g.node(gi, gj));
            if (j > 0) s.parent.push_back(long(i) * count[1] + j - 1);
            else s.parent.push_back(i == 0 ? -1 : long(i - 1) * count[1]);
        }
    return s;
}

FramePair propagate(const ImmersionField& w, const MapDerivatives& d, const Sweep& sw) {
    const auto& g = w.grid();
    const int N = w.ambient();
    if (N < g.dim() + 2)
        throw CapabilityError("normal pair needs N >= dim + 2 (have N = " + std::to_string(N) + ")");
    FramePair f{ImmersionField(g, N), ImmersionField(g, N), std::vector<std::uint8_t>(g.size(), 0), 0.0, {}};

    // Seed: rank axes by residual at the start node, then by the smallest
    // residual over the swept region, then by index.
    const Tangent t0(d, sw.order[0]);
    std::vector<double> start(N), region(N, 1.0);
    for (int a = 0; a < N; ++a) start[a] = t0.axis_residual(a);
    for (std::size_t p : sw.order) {
        const Tangent t(d, p);
        for (int a = 0; a < N; ++a) region[a] = std::min(region[a], t.axis_residual(a));
    }
    std::vector<int> rank(N);
    std::iota(rank.begin(), rank.end(), 0);
    std::stable_sort(rank.begin(), rank.end(), [&](int x, int y) {
        if (std::abs(start[x] - start[y]) > kTie) return start[x] > start[y];
        if (std::abs(region[x] - region[y]) > kTie) return region[x] > region[y];
        return false;
    });
    std::vector<double> nu(N, 0.0), b(N, 0.0);
    nu[rank[0]] = 1.0;
    t0.project(nu);
    normalize(nu);
    bool seeded = false;
    for (int k = 1; k < N && !seeded; ++k) {
        std::fill(b.begin(), b.end(), 0.0);
        b[rank[k]] = 1.0;
        t0.project(b);
        const double s = dot(b, nu);
        for (int a = 0; a < N; ++a) b[a] -= s * nu[a];
        if (std::sqrt(dot(b, b)) > 1e-3) seeded = true;
    }
    if (!seeded) throw PropagationError("no second normal direction at the seed node");
    normalize(b);

    auto store = [&](std::size_t p, const std::vector<double>& n1, const std::vector<double>& b1) {
        std::copy(n1.begin(), n1.end(), f.nu.point(p));
        std::copy(b1.begin(), b1.end(), f.b.point(p));
        f.defined[p] = 1;
    };
    store(sw.order[0], nu, b);
    std::vector<double> n1(N), b1(N);
    for (std::size_t k = 1; k < sw.order.size(); ++k) {
        const std::size_t p = sw.order[k], from = sw.order[sw.parent[k]];
        const Tangent t(d, p);
        std::copy(f.nu.point(from), f.nu.point(from) + N, n1.begin());
        std::copy(f.b.point(from), f.b.point(from) + N, b1.begin());
        t.project(n1);
        t.project(b1);
        const double g11 = dot(n1, n1), g12 = dot(n1, b1), g22 = dot(b1, b1);
        if (g11 * g22 - g12 * g12 < 1e-6)
            throw PropagationError("projected normal pair collapses at node " + std::to_string(p));
        normalize(n1);
        const double s = dot(b1, n1);
        for (int a = 0; a < N; ++a) b1[a] -= s * n1[a];
        normalize(b1);
        store(p, n1, b1);
    }

    // Mismatch: transport each frame to every defined grid neighbour and
    // compare, counting both in-plane rotation and tilt of the plane.
    double worst = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
        if (!f.defined[p]) continue;
        auto [i, j] = g.index(p);
        for (int ax = 0; ax < g.dim(); ++ax) {
            const std::size_t q = ax == 0 ? g.node((i + 1) % g.res(0), j) : g.node(i, (j + 1) % g.res(1));
            if (!f.defined[q]) continue;
            const Tangent t(d, q);
            std::copy(f.nu.point(p), f.nu.point(p) + N, n1.begin());
            std::copy(f.b.point(p), f.b.point(p) + N, b1.begin());
            t.project(n1);
            t.project(b1);
            normalize(n1);
            const double s = dot(b1, n1);
            for (int a = 0; a < N; ++a) b1[a] -= s * n1[a];
            normalize(b1);
            std::vector<double> nq(f.nu.point(q), f.nu.point(q) + N), bq(f.b.point(q), f.b.point(q) + N);
            const double c11 = dot(n1, nq), c12 = dot(n1, bq), c21 = dot(b1, nq), c22 = dot(b1, bq);
            const double tilt = std::acos(std::clamp(std::abs(c11 * c22 - c12 * c21), 0.0, 1.0));
            worst = std::max({worst, std::abs(std::atan2(c12, c11)), tilt});
        }
    }
    f.seam_mismatch = worst;
    return f;
}

}  // namespace

FramePair normal_pair(const ImmersionField& w, const MapDerivatives& d) {
    auto f = propagate(w, d, full_sweep(w.grid()));
    f.region.whole_chart = true;
    return f;
}

FramePair normal_pair(const ImmersionField& w) { return normal_pair(w, map_derivatives(w)); }

FramePair normal_pair_on_patch(const ImmersionField& w, const MapDerivatives& d, const Patch& patch) {
    auto f = propagate(w, d, patch_sweep(w.grid(), patch));
    f.region = patch;
    return f;
}

FrameAudit audit_frame(const FramePair& f, const MapDerivatives& d) {
    FrameAudit out;
    const auto& g = f.nu.grid();
    const int N = f.nu.ambient();
    for (std::size_t p = 0; p < g.size(); ++p) {
        if (!f.defined[p]) continue;
        const double* n = f.nu.point(p);
        const double* b = f.b.point(p);
        double nn = 0, bb = 0, nb = 0;
        for (int a = 0; a < N; ++a) {
            nn += n[a] * n[a];
            bb += b[a] * b[a];
            nb += n[a] * b[a];
        }
        out.unit = std::max({out.unit, std::abs(std::sqrt(nn) - 1), std::abs(std::sqrt(bb) - 1)});
        out.orth = std::max(out.orth, std::abs(nb));
        for (int i = 0; i < d.dim; ++i) {
            const double* t = d.first(p, i);
            double sn = 0, sb = 0;
            for (int a = 0; a < N; ++a) {
                sn += n[a] * t[a];
                sb += b[a] * t[a];
            }
            out.normal = std::max({out.normal, std::abs(sn), std::abs(sb)});
        }
    }
    return out;
}

}  // namespace corrugate
