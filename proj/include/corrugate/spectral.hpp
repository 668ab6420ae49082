#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "corrugate/grid.hpp"

namespace corrugate {

struct Mode {
    std::size_t index;
    int k0, k1;
    bool nyq0, nyq1;
};

// Half-spectrum of a real periodic sample array (FFTW r2c layout, unnormalized).
class Spectrum {
public:
    Spectrum(const PeriodicGrid& g, const std::vector<double>& samples);
    Spectrum(const PeriodicGrid& g, std::vector<std::complex<double>> coeffs);

    const PeriodicGrid& grid() const { return grid_; }
    std::vector<std::complex<double>>& coeffs() { return c_; }
    const std::vector<std::complex<double>>& coeffs() const { return c_; }

    std::vector<double> real() const;
    // Mixed partial of order (m0, m1); odd orders drop the Nyquist mode.
    std::vector<double> derivative(int m0, int m1 = 0) const;
    // Inverse transform after scaling each mode by mult(k0, k1).
    std::vector<double> filtered(const std::function<double(int, int)>& mult) const;

    template <class F>
    void for_each_mode(F&& f) const {
        const int n0 = grid_.res(0);
        if (grid_.dim() == 1) {
            for (int i = 0; i <= n0 / 2; ++i) f(Mode{std::size_t(i), i, 0, i == n0 / 2, false});
            return;
        }
        const int n1 = grid_.res(1), h1 = n1 / 2 + 1;
        for (int i = 0; i < n0; ++i) {
            const int k0 = i <= n0 / 2 ? i : i - n0;
            for (int j = 0; j < h1; ++j)
                f(Mode{std::size_t(i) * h1 + j, k0, j, i == n0 / 2, j == n1 / 2});
        }
    }

    static std::size_t half_size(const PeriodicGrid& g);

private:
    PeriodicGrid grid_;
    std::vector<std::complex<double>> c_;
};

std::vector<double> derivative(const PeriodicGrid& g, const std::vector<double>& f, int m0, int m1 = 0);

// Spectral interpolation onto another power-of-two grid of the same dimension.
// Throws AliasingError when energy sits above the target Nyquist band.
std::vector<double> resample_samples(const PeriodicGrid& from, const std::vector<double>& f,
                                     const PeriodicGrid& to);

// Largest |k| (max over axes) carrying a coefficient above tol * max coefficient.
int bandwidth(const PeriodicGrid& g, const std::vector<double>& f, double tol = 1e-12);

}  // namespace corrugate
