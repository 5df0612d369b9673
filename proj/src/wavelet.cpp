#include "ergsyn/wavelet.hpp"

#include <cmath>
#include <numbers>

#include "ergsyn/errors.hpp"
#include "ergsyn/image.hpp"

namespace ergsyn {

namespace {

// Probabilists' Hermite polynomial He_n(t) by recurrence.
double hermite(int n, double t) {
    double h0 = 1.0, h1 = t;
    if (n == 0) return h0;
    for (int k = 1; k < n; ++k) {
        const double h2 = t * h1 - static_cast<double>(k) * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

double lgamma_half(int n) {
    // Gamma(n + 1/2) through lgamma; exact enough at these orders.
    return std::lgamma(static_cast<double>(n) + 0.5);
}

}  // namespace

double MotherWavelet::eval(double t) const {
    static const double pi_quarter = std::pow(std::numbers::pi, 0.25);
    switch (kind) {
        case WaveletKind::Ricker: {
            const double c = 2.0 / (std::sqrt(3.0) * pi_quarter);
            return c * (1.0 - t * t) * std::exp(-0.5 * t * t);
        }
        case WaveletKind::GaussianDeriv: {
            const int n = gauss_order;
            const double c = std::exp(-0.5 * lgamma_half(n));
            const double sign = (n % 2 == 0) ? 1.0 : -1.0;
            return c * sign * hermite(n, t) * std::exp(-0.5 * t * t);
        }
        case WaveletKind::Morlet: {
            const double correction = std::exp(-0.5 * morlet_omega0 * morlet_omega0);
            return std::numbers::sqrt2 / pi_quarter * std::exp(-0.5 * t * t) *
                   (std::cos(morlet_omega0 * t) - correction);
        }
    }
    return 0.0;
}

ScaleGrid ScaleGrid::geometric(double lo, double hi, int count) {
    if (count < 1 || lo <= 0.0 || hi < lo)
        throw ConfigError("geometric scale grid needs 0 < lo <= hi and count >= 1");
    ScaleGrid g;
    g.scales.resize(static_cast<std::size_t>(count));
    if (count == 1) {
        g.scales[0] = lo;
        return g;
    }
    const double ratio = std::log(hi / lo) / static_cast<double>(count - 1);
    for (int i = 0; i < count; ++i)
        g.scales[static_cast<std::size_t>(i)] = lo * std::exp(ratio * i);
    return g;
}

void ScaleGrid::check() const {
    if (scales.empty()) throw ConfigError("scale grid is empty");
    double prev = 0.0;
    for (double s : scales) {
        if (!(s > 0.0)) throw ConfigError("scales must be positive");
        if (s <= prev) throw ConfigError("scales must be strictly increasing");
        prev = s;
    }
}

ScaleGrid default_scale_grid() { return ScaleGrid::geometric(1.0, 64.0, 64); }

Eigen::MatrixXd cwt(std::span<const double> signal, const MotherWavelet& wavelet,
                    const ScaleGrid& grid) {
    grid.check();
    const auto n = static_cast<Eigen::Index>(signal.size());
    const auto n_scales = static_cast<Eigen::Index>(grid.scales.size());
    Eigen::MatrixXd out(n_scales, n);

    for (Eigen::Index si = 0; si < n_scales; ++si) {
        const double a = grid.scales[static_cast<std::size_t>(si)];
        const auto half = static_cast<Eigen::Index>(std::ceil(wavelet.support_radius() * a));
        Eigen::VectorXd kernel(2 * half + 1);
        for (Eigen::Index k = -half; k <= half; ++k)
            kernel[k + half] = wavelet.eval(static_cast<double>(k) / a);
        const double norm = 1.0 / std::sqrt(a);

        for (Eigen::Index j = 0; j < n; ++j) {
            const Eigen::Index k_lo = std::max<Eigen::Index>(-half, -j);
            const Eigen::Index k_hi = std::min<Eigen::Index>(half, n - 1 - j);
            double acc = 0.0;
            for (Eigen::Index k = k_lo; k <= k_hi; ++k)
                acc += signal[static_cast<std::size_t>(j + k)] * kernel[k + half];
            out(si, j) = norm * acc;
        }
    }
    return out;
}

Scalogram build_scalogram(std::span<const double> signal, const ScaleGrid& grid, int resize_to) {
    const MotherWavelet mothers[3] = {
        {WaveletKind::Ricker, 1, 5.0},
        {WaveletKind::GaussianDeriv, 1, 5.0},
        {WaveletKind::Morlet, 1, 5.0},
    };

    Scalogram s;
    s.grid = grid;
    s.channels.reserve(3);
    for (const auto& mother : mothers) {
        Eigen::MatrixXd m = cwt(signal, mother, grid).cwiseAbs();
        if (resize_to > 0) m = bilinear_resize(m, resize_to, resize_to);
        const double lo = m.minCoeff();
        const double hi = m.maxCoeff();
        if (hi > lo)
            m = (m.array() - lo) / (hi - lo);
        else
            m.setZero();
        s.channels.push_back(std::move(m));
    }
    return s;
}

}  // namespace ergsyn
