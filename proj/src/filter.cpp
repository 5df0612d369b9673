#include "ergsyn/filter.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "ergsyn/errors.hpp"

namespace ergsyn {

namespace {

// Expands prod_k (z - roots[k]) into monic polynomial coefficients
// [1, c1, ..., cn]; roots come in conjugate pairs so the result is real.
std::vector<double> poly_from_roots(const std::vector<std::complex<double>>& roots) {
    std::vector<std::complex<double>> coeffs{1.0};
    for (const auto& r : roots) {
        std::vector<std::complex<double>> next(coeffs.size() + 1, 0.0);
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            next[i] += coeffs[i];
            next[i + 1] -= coeffs[i] * r;
        }
        coeffs = std::move(next);
    }
    std::vector<double> out(coeffs.size());
    for (std::size_t i = 0; i < coeffs.size(); ++i) out[i] = coeffs[i].real();
    return out;
}

}  // namespace

FilterCoeffs butterworth_design(int order, double cutoff) {
    if (order < 1) throw ConfigError("filter order must be >= 1");
    if (!(cutoff > 0.0 && cutoff < 1.0))
        throw ConfigError("filter cutoff must lie strictly inside (0, 1)");

    const double warped = std::tan(std::numbers::pi * cutoff / 2.0);

    std::vector<std::complex<double>> zpoles(static_cast<std::size_t>(order));
    for (int k = 0; k < order; ++k) {
        const double theta =
            std::numbers::pi * (2.0 * k + 1.0) / (2.0 * order) + std::numbers::pi / 2.0;
        const std::complex<double> s = warped * std::polar(1.0, theta);
        zpoles[static_cast<std::size_t>(k)] = (1.0 + s) / (1.0 - s);
    }

    FilterCoeffs c;
    c.a = poly_from_roots(zpoles);

    // Zeros all at z = -1; gain normalized so H(1) = 1.
    std::vector<std::complex<double>> zzeros(static_cast<std::size_t>(order), -1.0);
    c.b = poly_from_roots(zzeros);
    std::complex<double> gain = 1.0;
    for (const auto& p : zpoles) gain *= (1.0 - p);
    const double k = gain.real() / std::pow(2.0, order);
    for (double& v : c.b) v *= k;
    return c;
}

std::vector<double> lfilter(std::span<const double> x, const FilterCoeffs& c) {
    const std::size_t n = c.a.size() - 1;
    std::vector<double> state(n, 0.0);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double yi = c.b[0] * x[i] + (n > 0 ? state[0] : 0.0);
        for (std::size_t j = 0; j + 1 < n; ++j)
            state[j] = c.b[j + 1] * x[i] + state[j + 1] - c.a[j + 1] * yi;
        if (n > 0) state[n - 1] = c.b[n] * x[i] - c.a[n] * yi;
        y[i] = yi;
    }
    return y;
}

namespace {

std::vector<double> lfilter_with_init(std::span<const double> x, const FilterCoeffs& c,
                                      const std::vector<double>& zi) {
    const std::size_t n = c.a.size() - 1;
    std::vector<double> state = zi;
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double yi = c.b[0] * x[i] + (n > 0 ? state[0] : 0.0);
        for (std::size_t j = 0; j + 1 < n; ++j)
            state[j] = c.b[j + 1] * x[i] + state[j + 1] - c.a[j + 1] * yi;
        if (n > 0) state[n - 1] = c.b[n] * x[i] - c.a[n] * yi;
        y[i] = yi;
    }
    return y;
}

}  // namespace

std::vector<double> steady_state_init(const FilterCoeffs& c) {
    // With unit DC gain the steady-state output for x = 1 is y = 1, so the
    // direct-form II transposed states solve by back substitution.
    const std::size_t n = c.a.size() - 1;
    std::vector<double> zi(n, 0.0);
    double acc = 0.0;
    for (std::size_t j = n; j > 0; --j) {
        acc += c.b[j] - c.a[j];
        zi[j - 1] = acc;
    }
    return zi;
}

std::vector<double> butterworth_lowpass(std::span<const double> x, const FilterSpec& spec) {
    const FilterCoeffs c = butterworth_design(spec.order, spec.cutoff);
    const std::size_t n = x.size();
    if (n < 3 * static_cast<std::size_t>(spec.order))
        throw DataError("input too short for zero-phase padding: need at least " +
                        std::to_string(3 * spec.order) + " samples, got " + std::to_string(n));

    if (!spec.zero_phase) return lfilter(x, c);

    const std::size_t padlen = std::min<std::size_t>(3 * static_cast<std::size_t>(spec.order), n - 1);
    std::vector<double> ext;
    ext.reserve(n + 2 * padlen);
    for (std::size_t i = padlen; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= padlen; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

    const std::vector<double> zi = steady_state_init(c);

    auto scaled = [&](double x0) {
        std::vector<double> z = zi;
        for (double& v : z) v *= x0;
        return z;
    };

    std::vector<double> fwd = lfilter_with_init(ext, c, scaled(ext.front()));
    std::reverse(fwd.begin(), fwd.end());
    std::vector<double> bwd = lfilter_with_init(fwd, c, scaled(fwd.front()));
    std::reverse(bwd.begin(), bwd.end());

    return std::vector<double>(bwd.begin() + static_cast<std::ptrdiff_t>(padlen),
                               bwd.begin() + static_cast<std::ptrdiff_t>(padlen + n));
}

}  // namespace ergsyn
