#include <doctest.h>
#include <fftw3.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "ergsyn/errors.hpp"
#include "ergsyn/filter.hpp"
#include "ergsyn/normalize.hpp"
#include "ergsyn/rng.hpp"
#include "ergsyn/types.hpp"

using namespace ergsyn;

namespace {

ERGRecord make_record(std::vector<double> samples) {
    ERGRecord r;
    r.samples = std::move(samples);
    r.label = Label::ASD;
    r.strength = FlashStrength::from_index(0);
    r.subject_id = "s0";
    return r;
}

std::vector<double> ramp() {
    std::vector<double> v(kSignalLength);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
    return v;
}

// Band power from a one-sided periodogram, frequencies normalized to Nyquist.
double band_power(const std::vector<double>& x, double f_lo, double f_hi) {
    const auto n = x.size();
    std::vector<double> in(x);
    std::vector<fftw_complex> out(n / 2 + 1);
    fftw_plan plan =
        fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), out.data(), FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);

    double power = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k <= n / 2; ++k) {
        const double f = 2.0 * static_cast<double>(k) / static_cast<double>(n);
        if (f < f_lo || f > f_hi) continue;
        power += out[k][0] * out[k][0] + out[k][1] * out[k][1];
        ++count;
    }
    return count ? power / static_cast<double>(count) : 0.0;
}

}  // namespace

TEST_SUITE("normalize") {
    TEST_CASE("constant signal under min-max maps to zeros with the degenerate flag") {
        const auto [rec, params] = normalize(make_record(std::vector<double>(kSignalLength, 5.0)),
                                             NormMode::MinMax);
        CHECK(params.degenerate);
        for (double v : rec.samples) CHECK(v == 0.0);
        CHECK(params.invert(0.0) == doctest::Approx(5.0));
    }

    TEST_CASE("ramp extremes map to the interval bounds") {
        const auto [rec, params] = normalize(make_record(ramp()), NormMode::MinMax);
        CHECK(rec.samples.front() == doctest::Approx(-1.0));
        CHECK(rec.samples.back() == doctest::Approx(1.0));
        for (double v : rec.samples) {
            CHECK(v >= -1.0);
            CHECK(v <= 1.0);
        }
    }

    TEST_CASE("z-score output has mean 0 and stddev 1 by independent summation") {
        std::vector<double> s(kSignalLength);
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<double>(i + 1);
        const auto [rec, params] = normalize(make_record(s), NormMode::ZScore);

        double mean = 0.0;
        for (double v : rec.samples) mean += v;
        mean /= static_cast<double>(rec.samples.size());
        double var = 0.0;
        for (double v : rec.samples) var += (v - mean) * (v - mean);
        var /= static_cast<double>(rec.samples.size());

        CHECK(std::abs(mean) < 1e-9);
        CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-9);
    }

    TEST_CASE("z-score of a constant signal is a degenerate-input error") {
        CHECK_THROWS_AS(normalize(make_record(std::vector<double>(kSignalLength, 3.0)),
                                  NormMode::ZScore),
                        DataError);
    }

    TEST_CASE("normalize then inverse map is the identity") {
        Rng rng(11);
        std::vector<double> s(kSignalLength);
        for (double& v : s) v = 40.0 * rng.gaussian() + 12.0;
        for (const NormMode mode : {NormMode::MinMax, NormMode::ZScore}) {
            const auto [rec, params] = normalize(make_record(s), mode);
            const auto back = apply_inverse(rec.samples, params);
            for (std::size_t i = 0; i < s.size(); ++i)
                CHECK(back[i] == doctest::Approx(s[i]).epsilon(1e-9));
        }
    }
}

TEST_SUITE("butterworth") {
    TEST_CASE("design rejects bad specs") {
        CHECK_THROWS_AS(butterworth_design(0, 0.5), ConfigError);
        CHECK_THROWS_AS(butterworth_design(4, 0.0), ConfigError);
        CHECK_THROWS_AS(butterworth_design(4, 1.0), ConfigError);
        CHECK_THROWS_AS(butterworth_lowpass(std::vector<double>(5, 0.0), FilterSpec{4, 0.2, true}),
                        DataError);
    }

    TEST_CASE("DC gain is unity") {
        const std::vector<double> dc(512, 1.0);
        for (const bool zero_phase : {false, true}) {
            const auto y = butterworth_lowpass(dc, FilterSpec{4, 0.2, zero_phase});
            CHECK(y.size() == dc.size());
            // Tail of the single-pass output is past the transient.
            for (std::size_t i = 256; i < y.size() - 32; ++i)
                CHECK(std::abs(y[i] - 1.0) < 1e-6);
        }
    }

    TEST_CASE("single-pass magnitude at the cutoff is 1/sqrt(2)") {
        const int n = 16384;
        const double cutoff = 0.2;
        std::vector<double> x(n);
        for (int i = 0; i < n; ++i)
            x[i] = std::sin(std::numbers::pi * cutoff * static_cast<double>(i));
        const auto y = butterworth_lowpass(x, FilterSpec{4, cutoff, false});

        // RMS over the second half, away from the startup transient.
        double in_sq = 0.0, out_sq = 0.0;
        for (int i = n / 2; i < n; ++i) {
            in_sq += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
            out_sq += y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
        }
        const double gain = std::sqrt(out_sq / in_sq);
        CHECK(gain == doctest::Approx(1.0 / std::numbers::sqrt2).epsilon(0.005));
    }

    TEST_CASE("zero-phase pass preserves a symmetric pulse argmax exactly") {
        std::vector<double> x(kSignalLength, 0.0);
        const int center = 117;
        for (int i = 0; i < static_cast<int>(kSignalLength); ++i)
            x[static_cast<std::size_t>(i)] = std::exp(-0.5 * std::pow((i - center) / 6.0, 2));
        const auto y = butterworth_lowpass(x, FilterSpec{4, 0.2, true});
        const auto argmax =
            std::distance(y.begin(), std::max_element(y.begin(), y.end()));
        CHECK(argmax == center);
    }

    TEST_CASE("filtering is linear") {
        Rng rng(3);
        std::vector<double> x(300), y(300);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = rng.gaussian();
            y[i] = rng.gaussian();
        }
        const double a = 1.7, b = -0.4;
        std::vector<double> combo(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) combo[i] = a * x[i] + b * y[i];

        const FilterSpec spec{4, 0.2, true};
        const auto fx = butterworth_lowpass(x, spec);
        const auto fy = butterworth_lowpass(y, spec);
        const auto fc = butterworth_lowpass(combo, spec);

        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double expect = a * fx[i] + b * fy[i];
            num += (fc[i] - expect) * (fc[i] - expect);
            den += expect * expect;
        }
        CHECK(std::sqrt(num / den) < 1e-9);
    }

    TEST_CASE("white noise rolls off past twice the cutoff, periodogram oracle") {
        const int order = 4;
        const double cutoff = 0.1;
        Rng rng(99);
        std::vector<double> noise(1 << 16);
        for (double& v : noise) v = rng.gaussian();
        const auto filtered = butterworth_lowpass(noise, FilterSpec{order, cutoff, true});

        // Zero-phase applies the filter twice, so the expected trend is
        // 2 * 6 dB/octave per order between one octave and the next.
        const double p1 = band_power(filtered, 2.0 * cutoff, 2.0 * cutoff * 1.2);
        const double p2 = band_power(filtered, 4.0 * cutoff, 4.0 * cutoff * 1.2);
        const double drop_db = 10.0 * std::log10(p1 / p2);
        CHECK(drop_db >= static_cast<double>(order) * 12.0);
    }
}
