#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ergsyn/cgan.hpp"
#include "ergsyn/dataset.hpp"
#include "ergsyn/tst.hpp"
#include "ergsyn/vit.hpp"

namespace ergsyn {

// Positive class is ASD.
struct ConfusionCounts {
    long long tp = 0, fp = 0, tn = 0, fn = 0;

    long long total() const { return tp + fp + tn + fn; }
};

struct ScoredTruth {
    double score = 0.0;  // larger means more ASD-like
    bool truth_asd = false;
};

// Undefined values (zero denominators, single-class AUC) stay empty rather
// than collapsing to 0.
struct MetricSet {
    std::optional<double> ba, precision, recall, f1, auc;
};

MetricSet metrics(const ConfusionCounts& counts, const std::vector<ScoredTruth>& scores);

ConfusionCounts confusion_from_predictions(const std::vector<double>& p_asd,
                                           const std::vector<int>& truth_labels,
                                           double threshold = 0.5);

// Rank-based AUC with ties counted 1/2. Empty optional when only one class
// is present.
std::optional<double> rank_auc(const std::vector<ScoredTruth>& scores);

struct EvalCellKey {
    std::string model;     // "TST" or "ViT"
    std::string variant;   // "Original" or "Original+Synthetic"
    std::string strength;  // "1.204" ... or "All"

    auto operator<=>(const EvalCellKey&) const = default;
};

struct EvalCell {
    std::vector<MetricSet> per_fold;
    MetricSet mean;
    int folds_with_undefined = 0;
};

struct EvalReport {
    std::map<EvalCellKey, EvalCell> cells;

    std::string render_markdown() const;
    std::string serialize_kv() const;  // deterministic key=value lines
};

MetricSet mean_metrics(const std::vector<MetricSet>& per_fold, int* folds_with_undefined);

struct Table2Options {
    std::set<std::string> models = {"TST", "ViT"};  // ViT runs only on "All"
    std::vector<FlashStrength> strengths;           // empty means all nine
    bool include_per_strength_rows = true;          // TST also runs per strength
    bool group_by_subject = false;
    int n_synthetic_per_cell = -1;  // -1 means match the real per-cell training count
    TstConfig tst;
    VitConfig vit;
    std::filesystem::path cache_dir;  // scalogram cache for ViT
    std::uint64_t seed = 0;
};

// The augmentation experiment: per strength row and per training variant,
// cross-validated training on the folds and evaluation on the untouched test
// set. Synthetic records only ever enter training folds. Throws DataError if
// any test record hash appears in the GAN training manifest.
EvalReport run_table2(const Dataset& real, const GanCheckpoint& checkpoint, const SplitPlan& plan,
                      const Table2Options& options);

struct SimilarityCell {
    double correlation = 0.0;      // Pearson r of mean waveforms
    double amplitude_ratio = 0.0;  // synthetic / real mean peak-to-peak
    int n_real = 0;
    int n_synthetic = 0;
};

struct SimilarityReport {
    std::map<CellKey, SimilarityCell> cells;
    std::vector<CellKey> skipped;  // cells empty on either side
};

SimilarityReport waveform_similarity(const Dataset& real, const Dataset& synthetic);

// n per (label, strength) cell found in the checkpoint manifest cells.
Dataset generate_synthetic(const GanCheckpoint& checkpoint, int n_per_cell, std::uint64_t seed);

}  // namespace ergsyn
