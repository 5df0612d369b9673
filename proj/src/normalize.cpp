#include "ergsyn/normalize.hpp"

#include <algorithm>
#include <cmath>

#include "ergsyn/errors.hpp"

namespace ergsyn {

double NormParams::invert(double y) const {
    if (mode == NormMode::MinMax) {
        if (degenerate) return a;
        return (y + 1.0) * 0.5 * (b - a) + a;
    }
    return y * b + a;
}

NormalizedRecord normalize(const ERGRecord& record, NormMode mode) {
    validate(record);
    NormalizedRecord out;
    out.record = record;
    auto& s = out.record.samples;

    if (mode == NormMode::MinMax) {
        const auto [lo_it, hi_it] = std::minmax_element(s.begin(), s.end());
        const double lo = *lo_it, hi = *hi_it;
        out.params = {NormMode::MinMax, lo, hi, hi == lo};
        if (hi == lo) {
            std::fill(s.begin(), s.end(), 0.0);
            return out;
        }
        const double scale = 2.0 / (hi - lo);
        for (double& x : s) x = (x - lo) * scale - 1.0;
        return out;
    }

    double mean = 0.0;
    for (double x : s) mean += x;
    mean /= static_cast<double>(s.size());
    double var = 0.0;
    for (double x : s) var += (x - mean) * (x - mean);
    var /= static_cast<double>(s.size());
    const double sd = std::sqrt(var);
    if (sd <= 0.0) throw DataError("z-score normalization of a constant signal");
    out.params = {NormMode::ZScore, mean, sd, false};
    for (double& x : s) x = (x - mean) / sd;
    return out;
}

std::vector<double> apply_inverse(std::span<const double> normalized, const NormParams& params) {
    std::vector<double> out(normalized.size());
    for (std::size_t i = 0; i < normalized.size(); ++i) out[i] = params.invert(normalized[i]);
    return out;
}

}  // namespace ergsyn
