#include "ergsyn/types.hpp"

#include <cmath>
#include <cstdio>

#include "ergsyn/errors.hpp"
#include "ergsyn/rng.hpp"

namespace ergsyn {

std::string_view to_string(Label l) { return l == Label::ASD ? "ASD" : "CONTROL"; }

std::string_view to_string(Eye e) {
    switch (e) {
        case Eye::Left: return "LEFT";
        case Eye::Right: return "RIGHT";
        default: return "UNKNOWN";
    }
}

std::string_view to_string(Provenance p) {
    return p == Provenance::Real ? "REAL" : "SYNTHETIC";
}

Label parse_label(std::string_view s) {
    if (s == "ASD") return Label::ASD;
    if (s == "CONTROL") return Label::Control;
    throw DataError("unknown label '" + std::string(s) + "' (expected ASD or CONTROL)");
}

Eye parse_eye(std::string_view s) {
    if (s == "LEFT") return Eye::Left;
    if (s == "RIGHT") return Eye::Right;
    if (s == "UNKNOWN") return Eye::Unknown;
    throw DataError("unknown eye '" + std::string(s) + "'");
}

Provenance parse_provenance(std::string_view s) {
    if (s == "REAL") return Provenance::Real;
    if (s == "SYNTHETIC") return Provenance::Synthetic;
    throw DataError("unknown provenance '" + std::string(s) + "'");
}

const std::array<FlashStrength::Entry, FlashStrength::kCount>& FlashStrength::catalog() {
    static const std::array<Entry, kCount> entries = {{
        {446.0, 1.204},
        {356.0, 1.114},
        {251.0, 0.949},
        {178.0, 0.799},
        {113.0, 0.602},
        {70.0, 0.398},
        {35.0, 0.114},
        {21.0, -0.119},
        {12.0, -0.367},
    }};
    return entries;
}

FlashStrength FlashStrength::from_index(int index) {
    if (index < 0 || index >= kCount)
        throw ConfigError("flash strength index out of range: " + std::to_string(index));
    return FlashStrength(index);
}

FlashStrength FlashStrength::from_log_cd(double log_cd) {
    for (int i = 0; i < kCount; ++i) {
        if (std::abs(catalog()[static_cast<std::size_t>(i)].log_cd - log_cd) < 5e-4)
            return FlashStrength(i);
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", log_cd);
    throw DataError(std::string("flash strength ") + buf + " is not a catalog value");
}

std::string FlashStrength::log_cd_string() const {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", log_cd());
    return buf;
}

void validate(const ERGRecord& record) {
    if (record.samples.size() != kSignalLength)
        throw DataError("expected " + std::to_string(kSignalLength) + " samples, got " +
                        std::to_string(record.samples.size()));
    for (std::size_t i = 0; i < record.samples.size(); ++i) {
        if (!std::isfinite(record.samples[i]))
            throw DataError("non-finite sample at index " + std::to_string(i));
    }
}

std::uint64_t record_hash(const ERGRecord& record) {
    std::uint64_t h = fnv1a64(record.samples.data(), record.samples.size() * sizeof(double));
    const unsigned char meta[2] = {static_cast<unsigned char>(record.label),
                                   static_cast<unsigned char>(record.strength.index())};
    return fnv1a64(meta, sizeof(meta), h);
}

}  // namespace ergsyn
