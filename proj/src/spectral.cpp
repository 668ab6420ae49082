#include "corrugate/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <tuple>

#include "corrugate/errors.hpp"

namespace corrugate {

namespace {

struct FftwBuffer {
    explicit FftwBuffer(std::size_t bytes) : p(fftw_malloc(bytes)) {}
    ~FftwBuffer() { fftw_free(p); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    void* p;
};

std::mutex plan_mutex;

fftw_plan plan_for(const PeriodicGrid& g, bool forward) {
    static std::map<std::tuple<int, int, int, bool>, fftw_plan> cache;
    std::lock_guard lock(plan_mutex);
    auto key = std::make_tuple(g.dim(), g.res(0), g.res(1), forward);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    FftwBuffer r(sizeof(double) * g.size());
    FftwBuffer c(sizeof(fftw_complex) * Spectrum::half_size(g));
    auto* rp = static_cast<double*>(r.p);
    auto* cp = static_cast<fftw_complex*>(c.p);
    fftw_plan plan;
    if (g.dim() == 1)
        plan = forward ? fftw_plan_dft_r2c_1d(g.res(0), rp, cp, FFTW_ESTIMATE)
                       : fftw_plan_dft_c2r_1d(g.res(0), cp, rp, FFTW_ESTIMATE);
    else
        plan = forward ? fftw_plan_dft_r2c_2d(g.res(0), g.res(1), rp, cp, FFTW_ESTIMATE)
                       : fftw_plan_dft_c2r_2d(g.res(0), g.res(1), cp, rp, FFTW_ESTIMATE);
    cache.emplace(key, plan);
    return plan;
}

std::vector<double> inverse(const PeriodicGrid& g, const std::vector<std::complex<double>>& c) {
    FftwBuffer r(sizeof(double) * g.size());
    FftwBuffer cb(sizeof(fftw_complex) * c.size());
    std::memcpy(cb.p, c.data(), sizeof(fftw_complex) * c.size());
    fftw_execute_dft_c2r(plan_for(g, false), static_cast<fftw_complex*>(cb.p), static_cast<double*>(r.p));
    std::vector<double> out(g.size());
    const double scale = 1.0 / static_cast<double>(g.size());
    const auto* rp = static_cast<const double*>(r.p);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = rp[k] * scale;
    return out;
}

std::complex<double> ipow(int k, int m) {
    std::complex<double> z(1.0, 0.0);
    for (int s = 0; s < m; ++s) z *= std::complex<double>(0.0, k);
    return z;
}

}  // namespace

std::size_t Spectrum::half_size(const PeriodicGrid& g) {
    return g.dim() == 1 ? std::size_t(g.res(0) / 2 + 1) : std::size_t(g.res(0)) * (g.res(1) / 2 + 1);
}

Spectrum::Spectrum(const PeriodicGrid& g, const std::vector<double>& samples) : grid_(g), c_(half_size(g)) {
    if (samples.size() != g.size()) throw InputError("sample count does not match grid");
    FftwBuffer r(sizeof(double) * g.size());
    FftwBuffer cb(sizeof(fftw_complex) * c_.size());
    std::memcpy(r.p, samples.data(), sizeof(double) * samples.size());
    fftw_execute_dft_r2c(plan_for(g, true), static_cast<double*>(r.p), static_cast<fftw_complex*>(cb.p));
    std::memcpy(c_.data(), cb.p, sizeof(fftw_complex) * c_.size());
}

Spectrum::Spectrum(const PeriodicGrid& g, std::vector<std::complex<double>> coeffs) : grid_(g), c_(std::move(coeffs)) {
    if (c_.size() != half_size(g)) throw InputError("coefficient count does not match grid");
}

std::vector<double> Spectrum::real() const { return inverse(grid_, c_); }

std::vector<double> Spectrum::derivative(int m0, int m1) const {
    if (m0 == 0 && m1 == 0) return real();
    std::vector<std::complex<double>> d(c_.size());
    for_each_mode([&](const Mode& m) {
        if ((m.nyq0 && (m0 % 2)) || (m.nyq1 && (m1 % 2))) {
            d[m.index] = 0.0;
            return;
        }
        d[m.index] = c_[m.index] * ipow(m.k0, m0) * ipow(m.k1, m1);
    });
    return inverse(grid_, d);
}

std::vector<double> Spectrum::filtered(const std::function<double(int, int)>& mult) const {
    std::vector<std::complex<double>> d(c_.size());
    for_each_mode([&](const Mode& m) { d[m.index] = c_[m.index] * mult(m.k0, m.k1); });
    return inverse(grid_, d);
}

std::vector<double> derivative(const PeriodicGrid& g, const std::vector<double>& f, int m0, int m1) {
    return Spectrum(g, f).derivative(m0, m1);
}

int bandwidth(const PeriodicGrid& g, const std::vector<double>& f, double tol) {
    Spectrum s(g, f);
    double cmax = 0.0;
    for (auto& z : s.coeffs()) cmax = std::max(cmax, std::abs(z));
    int band = 0;
    s.for_each_mode([&](const Mode& m) {
        if (std::abs(s.coeffs()[m.index]) > tol * cmax)
            band = std::max({band, std::abs(m.k0), std::abs(m.k1)});
    });
    return band;
}

std::vector<double> resample_samples(const PeriodicGrid& from, const std::vector<double>& f, const PeriodicGrid& to) {
    if (from.dim() != to.dim()) throw InputError("resample: dimension mismatch");
    if (from == to) return f;
    Spectrum src(from, f);
    double cmax = 0.0;
    for (auto& z : src.coeffs()) cmax = std::max(cmax, std::abs(z));
    const double scale = static_cast<double>(to.size()) / static_cast<double>(from.size());
    std::vector<std::complex<double>> dst(Spectrum::half_size(to), 0.0);
    const bool two = from.dim() == 2;
    // Axis carrying the half spectrum: 0 in 1-D, 1 in 2-D.
    const int nf0 = from.res(0), nt0 = to.res(0);
    const int nf1 = two ? from.res(1) : 1, nt1 = two ? to.res(1) : 1;
    const int ht1 = nt1 / 2 + 1;
    src.for_each_mode([&](const Mode& m) {
        std::complex<double> c = src.coeffs()[m.index] * scale;
        if (std::abs(c) <= 1e-12 * cmax * scale) c = 0.0;
        if (!two) {
            int k = m.k0;
            if (c != 0.0 && nt0 < nf0 && 2 * k >= nt0)
                throw AliasingError("resample: field bandwidth exceeds target grid");
            if (m.nyq0 && nt0 > nf0) c *= 0.5;
            if (k <= nt0 / 2) dst[k] += c;
            return;
        }
        if (c != 0.0 && ((nt0 < nf0 && 2 * std::abs(m.k0) >= nt0) || (nt1 < nf1 && 2 * m.k1 >= nt1)))
            throw AliasingError("resample: field bandwidth exceeds target grid");
        if (2 * std::abs(m.k0) > nt0 || 2 * m.k1 > nt1) return;
        if (m.nyq1 && nt1 > nf1) c *= 0.5;
        auto put = [&](int k0, std::complex<double> v) {
            int i0 = k0 >= 0 ? k0 : k0 + nt0;
            dst[std::size_t(i0) * ht1 + m.k1] += v;
        };
        if (m.nyq0 && nt0 > nf0) {
            put(m.k0, 0.5 * c);
            put(-m.k0, 0.5 * c);
        } else {
            put(m.k0, c);
        }
    });
    return Spectrum(to, std::move(dst)).real();
}

}  // namespace corrugate
