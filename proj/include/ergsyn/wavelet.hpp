#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

namespace ergsyn {

enum class WaveletKind { Ricker, GaussianDeriv, Morlet };

// Closed-form zero-mean analysis templates. All three are unit-energy:
//   Ricker          (2 / (sqrt(3) pi^{1/4})) (1 - t^2) e^{-t^2/2}
//   GaussianDeriv   C_n d^n/dt^n e^{-t^2/2},      C_n = Gamma(n + 1/2)^{-1/2}
//   Morlet (real)   sqrt(2) pi^{-1/4} e^{-t^2/2} (cos(w0 t) - e^{-w0^2/2})
// The Morlet correction term keeps the integral of the template at zero; for
// w0 = 5 it is ~4e-6 and invisible everywhere else.
struct MotherWavelet {
    WaveletKind kind = WaveletKind::Ricker;
    int gauss_order = 1;
    double morlet_omega0 = 5.0;

    double eval(double t) const;
    // |t| beyond this is numerically zero for the truncated kernels.
    double support_radius() const { return 9.0; }
};

struct ScaleGrid {
    std::vector<double> scales;  // strictly increasing, all > 0

    static ScaleGrid geometric(double lo, double hi, int count);
    void check() const;  // throws ConfigError on violated invariants
};

// Entry (i, j) = (1/sqrt(a_i)) sum_t x[t] psi((t - j) / a_i) with x zero
// outside its support. Rows are scales, columns time.
Eigen::MatrixXd cwt(std::span<const double> signal, const MotherWavelet& wavelet,
                    const ScaleGrid& grid);

// Channel order is fixed: 0 Ricker, 1 Gaussian derivative, 2 Morlet.
struct Scalogram {
    std::vector<Eigen::MatrixXd> channels;  // size 3
    ScaleGrid grid;
};

// |cwt| per channel, optional bilinear resize to resize_to x resize_to, then
// per-channel min-max scaling to [0, 1] (constant channels map to zero).
Scalogram build_scalogram(std::span<const double> signal, const ScaleGrid& grid,
                          int resize_to = 0);

ScaleGrid default_scale_grid();  // 64 geometric scales over [1, 64]

}  // namespace ergsyn
