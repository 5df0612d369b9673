#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ergsyn {

// All waveforms in this toolkit are fixed-length averaged recordings.
inline constexpr std::size_t kSignalLength = 235;

enum class Label { ASD, Control };
enum class Eye { Left, Right, Unknown };
enum class Provenance { Real, Synthetic };

std::string_view to_string(Label l);
std::string_view to_string(Eye e);
std::string_view to_string(Provenance p);
Label parse_label(std::string_view s);
Eye parse_eye(std::string_view s);
Provenance parse_provenance(std::string_view s);

// One of the nine stimulus strengths of the recording protocol. Instances can
// only be built from the catalog, so the (Td.s, log cd.s.m^-2) pairing is
// correct by construction.
class FlashStrength {
public:
    struct Entry {
        double td_s;
        double log_cd;
    };

    static constexpr int kCount = 9;

    FlashStrength() = default;  // brightest strength
    static const std::array<Entry, kCount>& catalog();
    static FlashStrength from_index(int index);
    // Accepts any value within 5e-4 of a catalog entry (CSV carries 3 decimals).
    static FlashStrength from_log_cd(double log_cd);

    int index() const { return index_; }
    double td_s() const { return catalog()[static_cast<std::size_t>(index_)].td_s; }
    double log_cd() const { return catalog()[static_cast<std::size_t>(index_)].log_cd; }
    std::string log_cd_string() const;  // fixed 3 decimals, as in the CSV schema

    auto operator<=>(const FlashStrength&) const = default;

private:
    explicit FlashStrength(int index) : index_(index) {}
    int index_ = 0;
};

// One averaged waveform plus its acquisition metadata.
struct ERGRecord {
    std::vector<double> samples;  // length kSignalLength, microvolts
    Label label = Label::Control;
    FlashStrength strength;
    std::string subject_id;
    Eye eye = Eye::Unknown;
    Provenance provenance = Provenance::Real;
};

// Throws DataError if the sample count or finiteness invariants are violated.
void validate(const ERGRecord& record);

// Content hash over (samples, label, strength); used by the leakage guard.
std::uint64_t record_hash(const ERGRecord& record);

}  // namespace ergsyn
