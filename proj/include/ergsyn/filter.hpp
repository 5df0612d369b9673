#pragma once

#include <span>
#include <vector>

namespace ergsyn {

struct FilterSpec {
    int order = 4;
    double cutoff = 0.2;  // normalized to Nyquist, in (0, 1)
    bool zero_phase = true;
};

// IIR transfer function coefficients, a[0] == 1, ascending powers of z^-1.
struct FilterCoeffs {
    std::vector<double> b;
    std::vector<double> a;
};

// Digital Butterworth low-pass via analog prototype + bilinear transform.
// DC gain is exactly 1 and the magnitude at `cutoff` is exactly 1/sqrt(2) by
// construction. Throws ConfigError for cutoff outside (0,1) or order < 1.
FilterCoeffs butterworth_design(int order, double cutoff);

// Direct-form II transposed filter, zero initial state.
std::vector<double> lfilter(std::span<const double> x, const FilterCoeffs& c);

// Steady-state filter state for a unit-step input (scaled by the caller to the
// first sample to suppress startup transients in forward-backward filtering).
std::vector<double> steady_state_init(const FilterCoeffs& c);

// Single-pass or forward-backward Butterworth low-pass. Zero-phase mode uses
// odd reflection padding of length min(3*order, n-1) and steady-state initial
// conditions on each pass. Requires x.size() >= 3*order.
std::vector<double> butterworth_lowpass(std::span<const double> x, const FilterSpec& spec);

}  // namespace ergsyn
