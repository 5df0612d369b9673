#pragma once

#include <span>
#include <vector>

#include "ergsyn/types.hpp"

namespace ergsyn {

enum class NormMode { MinMax, ZScore };

// Parameters needed to map a normalized signal back to microvolts.
// MinMax: a = min, b = max, y = 2(x-a)/(b-a) - 1.
// ZScore: a = mean, b = population stddev, y = (x-a)/b.
struct NormParams {
    NormMode mode = NormMode::MinMax;
    double a = 0.0;
    double b = 1.0;
    bool degenerate = false;  // constant input under MinMax

    double invert(double y) const;
};

struct NormalizedRecord {
    ERGRecord record;
    NormParams params;
};

// Rescales a record's samples for training. MinMax maps onto [-1, 1] with the
// extremes attained; a constant signal maps to all zeros with the degenerate
// flag set. ZScore yields mean 0 / stddev 1 and throws DataError on a
// constant signal.
NormalizedRecord normalize(const ERGRecord& record, NormMode mode);

std::vector<double> apply_inverse(std::span<const double> normalized, const NormParams& params);

}  // namespace ergsyn
