#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ergsyn/types.hpp"

namespace ergsyn {

// Stratification cell: (label, strength).
struct CellKey {
    Label label = Label::Control;
    FlashStrength strength;

    auto operator<=>(const CellKey&) const = default;
    std::string to_string() const;
};

struct Dataset {
    std::vector<ERGRecord> records;

    std::map<CellKey, int> manifest() const;
    std::map<Provenance, int> provenance_counts() const;
    Dataset filter_strength(FlashStrength s) const;
    Dataset filter_provenance(Provenance p) const;
    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
};

// CSV schema (header required, LF line endings):
//   subject_id,eye,label,strength_log_cd,provenance,s0,...,s234
Dataset load_dataset_csv(const std::filesystem::path& path);
void save_dataset_csv(const Dataset& dataset, const std::filesystem::path& path);

struct SplitPlan {
    double test_fraction = 0.25;
    int folds = 5;
    std::uint64_t seed = 0;
    bool stratify_label = true;
    bool stratify_strength = true;
};

struct Fold {
    Dataset train;
    Dataset val;
};

struct Split {
    Dataset test;
    std::vector<Fold> folds;

    Dataset training_pool() const;  // union of any fold's train+val
};

// Record-level stratified hold-out + k-fold partition of the remainder.
// Deterministic given plan.seed. Throws ConfigError when a stratum is too
// small for the requested fold count.
Split split(const Dataset& dataset, const SplitPlan& plan);

// Same protocol but all records of one subject stay on one side of every
// split boundary. With one subject per record this reduces bit-for-bit to
// split().
Split subject_grouping(const Dataset& dataset, const SplitPlan& plan);

Dataset merge(const Dataset& real, const Dataset& synthetic);

// Parametric waveform generator used as the desk-scale stand-in for clinical
// recordings: a negative early lobe, a positive late lobe, damped
// oscillations riding the ascending limb, plus Gaussian noise. Classes are
// separable through the late-lobe amplitude/timing offsets.
struct OracleParams {
    double a_amplitude = 35.0;     // microvolts, trough depth at the brightest flash
    double a_time = 55.0;          // samples, time to trough
    double a_width = 9.0;
    double b_amplitude = 110.0;    // microvolts, peak height at the brightest flash
    double b_time = 95.0;          // samples, time to peak
    double b_width = 18.0;
    double op_amplitude = 9.0;     // oscillatory potentials on the ascending limb
    double op_frequency = 0.11;    // cycles per sample
    double op_damping = 0.05;      // per-sample exponential decay from the trough
    double asd_b_amplitude_factor = 0.85;  // class offset: ASD late lobe scaled down
    double asd_b_time_shift = 6.0;         // class offset: ASD peak delayed (samples)
    double strength_decay = 0.0625;        // amplitude loss per catalog step towards dim
    double noise_std = 5.0;        // microvolts
};

// Noise-free closed-form template for one (label, strength) cell.
std::vector<double> oracle_template(const OracleParams& params, Label label, FlashStrength strength);

// n_per_cell records for each of the 18 (label, strength) cells. Bitwise
// reproducible for equal seeds. Throws ConfigError on non-positive
// amplitudes or n_per_cell < 1.
Dataset simulate_oracle(const OracleParams& params, int n_per_cell, std::uint64_t seed);

// Same generator but restricted to a list of strengths.
Dataset simulate_oracle_cells(const OracleParams& params, const std::vector<FlashStrength>& strengths,
                              int n_per_cell, std::uint64_t seed);

// Reproduces the published per-cell record counts (509 ASD / 482 control).
Dataset simulate_oracle_reference_counts(const OracleParams& params, std::uint64_t seed);

}  // namespace ergsyn
