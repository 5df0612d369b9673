#include "ergsyn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ergsyn/errors.hpp"

namespace ergsyn {

std::optional<double> rank_auc(const std::vector<ScoredTruth>& scores) {
    std::size_t n_pos = 0, n_neg = 0;
    for (const auto& s : scores) (s.truth_asd ? n_pos : n_neg) += 1;
    if (n_pos == 0 || n_neg == 0) return std::nullopt;

    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a].score < scores[b].score; });

    // Average ranks across ties.
    std::vector<double> rank(scores.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]].score == scores[order[i]].score) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // ranks are 1-based
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
        i = j + 1;
    }

    double pos_rank_sum = 0.0;
    for (std::size_t k = 0; k < scores.size(); ++k)
        if (scores[k].truth_asd) pos_rank_sum += rank[k];
    const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
    return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

MetricSet metrics(const ConfusionCounts& c, const std::vector<ScoredTruth>& scores) {
    if (c.total() < 1) throw DataError("metrics need at least one evaluated record");
    MetricSet m;
    if (c.tp + c.fn > 0) m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    if (c.tp + c.fp > 0) m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    std::optional<double> specificity;
    if (c.tn + c.fp > 0) specificity = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
    if (m.recall && specificity) m.ba = 0.5 * (*m.recall + *specificity);
    if (m.precision && m.recall && (*m.precision + *m.recall) > 0.0)
        m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
    if (!scores.empty()) m.auc = rank_auc(scores);
    return m;
}

ConfusionCounts confusion_from_predictions(const std::vector<double>& p_asd,
                                           const std::vector<int>& truth_labels,
                                           double threshold) {
    if (p_asd.size() != truth_labels.size()) throw DataError("prediction/truth size mismatch");
    ConfusionCounts c;
    for (std::size_t i = 0; i < p_asd.size(); ++i) {
        const bool predicted_asd = p_asd[i] > threshold;
        const bool truth_asd = truth_labels[i] == 1;
        if (predicted_asd && truth_asd) ++c.tp;
        else if (predicted_asd && !truth_asd) ++c.fp;
        else if (!predicted_asd && truth_asd) ++c.fn;
        else ++c.tn;
    }
    return c;
}

MetricSet mean_metrics(const std::vector<MetricSet>& per_fold, int* folds_with_undefined) {
    MetricSet mean;
    int undefined = 0;
    auto average = [&](auto getter) -> std::optional<double> {
        double sum = 0.0;
        int n = 0;
        for (const auto& m : per_fold) {
            if (const auto v = getter(m)) {
                sum += *v;
                ++n;
            }
        }
        if (n == 0) return std::nullopt;
        return sum / n;
    };
    mean.ba = average([](const MetricSet& m) { return m.ba; });
    mean.precision = average([](const MetricSet& m) { return m.precision; });
    mean.recall = average([](const MetricSet& m) { return m.recall; });
    mean.f1 = average([](const MetricSet& m) { return m.f1; });
    mean.auc = average([](const MetricSet& m) { return m.auc; });
    for (const auto& m : per_fold)
        if (!m.ba || !m.precision || !m.recall || !m.f1 || !m.auc) ++undefined;
    if (folds_with_undefined) *folds_with_undefined = undefined;
    return mean;
}

// ---------------------------------------------------------------------------
// Report rendering
// ---------------------------------------------------------------------------

namespace {

std::string fmt(const std::optional<double>& v) {
    if (!v) return "—";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", *v);
    return buf;
}

std::string fmt_kv(const std::optional<double>& v) {
    if (!v) return "undefined";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", *v);
    return buf;
}

}  // namespace

std::string EvalReport::render_markdown() const {
    // Row order mirrors the result table: per-strength rows then "All".
    std::vector<std::pair<std::string, std::string>> rows;  // (model, strength)
    for (const auto& [key, cell] : cells) {
        const auto row = std::make_pair(key.model, key.strength);
        if (std::find(rows.begin(), rows.end(), row) == rows.end()) rows.push_back(row);
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;  // TST before ViT
        if (a.second == b.second) return false;
        if (a.second == "All") return false;
        if (b.second == "All") return true;
        return std::stod(a.second) > std::stod(b.second);  // bright to dim
    });

    std::ostringstream os;
    os << "| Network | Strength | BA | P | R | F1 | AUC | BA+ | P+ | R+ | F1+ | AUC+ |\n";
    os << "|---|---|---|---|---|---|---|---|---|---|---|---|\n";
    bool footnote = false;
    for (const auto& [model, strength] : rows) {
        const auto orig = cells.find(EvalCellKey{model, "Original", strength});
        const auto aug = cells.find(EvalCellKey{model, "Original+Synthetic", strength});
        os << "| " << model << " | " << strength << " |";
        for (const auto* cell : {orig != cells.end() ? &orig->second : nullptr,
                                 aug != cells.end() ? &aug->second : nullptr}) {
            if (!cell) {
                os << " — | — | — | — | — |";
                continue;
            }
            os << ' ' << fmt(cell->mean.ba) << " | " << fmt(cell->mean.precision) << " | "
               << fmt(cell->mean.recall) << " | " << fmt(cell->mean.f1) << " | "
               << fmt(cell->mean.auc) << " |";
            footnote |= cell->folds_with_undefined > 0;
        }
        os << "\n";
    }
    os << "\nColumns suffixed + are the Original+Synthetic training variant.\n";
    if (footnote)
        os << "Some folds had undefined metrics; means cover the defined folds only.\n";
    return os.str();
}

std::string EvalReport::serialize_kv() const {
    std::ostringstream os;
    for (const auto& [key, cell] : cells) {
        const std::string prefix = key.model + "|" + key.variant + "|" + key.strength;
        for (std::size_t f = 0; f < cell.per_fold.size(); ++f) {
            const auto& m = cell.per_fold[f];
            os << prefix << "|fold" << f << "|ba=" << fmt_kv(m.ba) << "\n";
            os << prefix << "|fold" << f << "|precision=" << fmt_kv(m.precision) << "\n";
            os << prefix << "|fold" << f << "|recall=" << fmt_kv(m.recall) << "\n";
            os << prefix << "|fold" << f << "|f1=" << fmt_kv(m.f1) << "\n";
            os << prefix << "|fold" << f << "|auc=" << fmt_kv(m.auc) << "\n";
        }
        os << prefix << "|mean|ba=" << fmt_kv(cell.mean.ba) << "\n";
        os << prefix << "|mean|precision=" << fmt_kv(cell.mean.precision) << "\n";
        os << prefix << "|mean|recall=" << fmt_kv(cell.mean.recall) << "\n";
        os << prefix << "|mean|f1=" << fmt_kv(cell.mean.f1) << "\n";
        os << prefix << "|mean|auc=" << fmt_kv(cell.mean.auc) << "\n";
        os << prefix << "|folds_with_undefined=" << cell.folds_with_undefined << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Table 2 experiment
// ---------------------------------------------------------------------------

Dataset generate_synthetic(const GanCheckpoint& checkpoint, int n_per_cell, std::uint64_t seed) {
    Dataset out;
    if (n_per_cell <= 0) return out;
    GanSession session(checkpoint);
    for (const auto& [cell, norm] : checkpoint.cell_norms) {
        for (int i = 0; i < n_per_cell; ++i) {
            const std::uint64_t s =
                fnv1a64("synthetic|" + cell.to_string() + "|" + std::to_string(i)) ^ seed;
            out.records.push_back(session.generate(ConditionCode{cell.label, cell.strength},
                                                   LatentSeed::from_seed(s, checkpoint.config.seq_len)));
        }
    }
    return out;
}

namespace {

void assert_no_synthetic(const Dataset& d, const std::string& where) {
    for (const auto& r : d.records)
        if (r.provenance == Provenance::Synthetic)
            throw DataError("synthetic record leaked into " + where);
}

Dataset filter_rows(const Dataset& d, const std::optional<FlashStrength>& strength) {
    if (!strength) return d;
    return d.filter_strength(*strength);
}

struct RowEval {
    std::vector<MetricSet> per_fold;
};

template <typename TrainFn, typename PredictFn>
RowEval evaluate_row(const std::vector<Fold>& folds, const Dataset& test, TrainFn train,
                     PredictFn predict) {
    RowEval out;
    auto models = train(folds);
    const auto truth = dataset_labels(test);
    for (std::size_t f = 0; f < models.size(); ++f) {
        const std::vector<double> p_asd = predict(models[f], test);
        const ConfusionCounts counts = confusion_from_predictions(p_asd, truth);
        std::vector<ScoredTruth> scores(test.size());
        for (std::size_t i = 0; i < test.size(); ++i)
            scores[i] = ScoredTruth{p_asd[i], truth[i] == 1};
        out.per_fold.push_back(metrics(counts, scores));
    }
    return out;
}

}  // namespace

EvalReport run_table2(const Dataset& real, const GanCheckpoint& checkpoint, const SplitPlan& plan,
                      const Table2Options& options) {
    const Split sp = options.group_by_subject ? subject_grouping(real, plan) : split(real, plan);

    // Hard leakage guard: the generative model must never have seen any test
    // record.
    std::set<std::uint64_t> manifest(checkpoint.training_manifest.begin(),
                                     checkpoint.training_manifest.end());
    for (const auto& rec : sp.test.records) {
        if (manifest.count(record_hash(rec)))
            throw DataError("leakage: test record (subject " + rec.subject_id +
                            ") appears in the GAN training manifest");
    }

    // Synthetic pool, sized per cell.
    std::map<CellKey, int> pool_counts = sp.training_pool().manifest();
    Dataset synthetic;
    {
        GanSession session(checkpoint);
        for (const auto& [cell, norm] : checkpoint.cell_norms) {
            int n = options.n_synthetic_per_cell;
            if (n < 0) {
                const auto it = pool_counts.find(cell);
                n = it == pool_counts.end() ? 0 : it->second;
            }
            for (int i = 0; i < n; ++i) {
                const std::uint64_t s =
                    fnv1a64("synthetic|" + cell.to_string() + "|" + std::to_string(i)) ^
                    options.seed;
                synthetic.records.push_back(
                    session.generate(ConditionCode{cell.label, cell.strength},
                                     LatentSeed::from_seed(s, checkpoint.config.seq_len)));
            }
        }
    }

    std::vector<FlashStrength> strengths = options.strengths;
    if (strengths.empty())
        for (int i = 0; i < FlashStrength::kCount; ++i)
            strengths.push_back(FlashStrength::from_index(i));

    struct Row {
        std::string model;
        std::optional<FlashStrength> strength;
    };
    std::vector<Row> rows;
    if (options.models.count("TST")) {
        if (options.include_per_strength_rows)
            for (const auto& s : strengths) rows.push_back({"TST", s});
        rows.push_back({"TST", std::nullopt});
    }
    if (options.models.count("ViT")) rows.push_back({"ViT", std::nullopt});

    std::optional<ScalogramCache> cache;
    if (options.models.count("ViT")) {
        const auto dir = options.cache_dir.empty() ? std::filesystem::path("scalogram-cache")
                                                   : options.cache_dir;
        cache.emplace(dir, default_scale_grid(), options.vit.image);
    }

    EvalReport report;
    for (const auto& row : rows) {
        const std::string strength_name = row.strength ? row.strength->log_cd_string() : "All";
        const Dataset test_row = filter_rows(sp.test, row.strength);
        if (test_row.empty()) continue;
        assert_no_synthetic(test_row, "test set");

        // Seeds shared across variants so zero augmentation reproduces the
        // original variant exactly.
        const std::uint64_t row_seed = fnv1a64(row.model + "|" + strength_name) ^ options.seed;

        for (const bool augmented : {false, true}) {
            std::vector<Fold> folds;
            for (const auto& fold : sp.folds) {
                Fold f;
                f.train = filter_rows(fold.train, row.strength);
                f.val = filter_rows(fold.val, row.strength);
                assert_no_synthetic(f.val, "a validation fold");
                if (augmented)
                    f.train = merge(f.train, filter_rows(synthetic, row.strength));
                folds.push_back(std::move(f));
            }

            RowEval eval;
            if (row.model == "TST") {
                TstConfig cfg = options.tst;
                cfg.seed = row_seed;
                eval = evaluate_row(
                    folds, test_row,
                    [&](const std::vector<Fold>& fs) { return tst_train(fs, cfg).models; },
                    [&](TstModel& m, const Dataset& d) { return tst_predict(m, d); });
            } else {
                VitConfig cfg = options.vit;
                cfg.seed = row_seed;
                eval = evaluate_row(
                    folds, test_row,
                    [&](const std::vector<Fold>& fs) { return vit_train(fs, cfg, *cache).models; },
                    [&](VitModel& m, const Dataset& d) { return vit_predict(m, d, *cache); });
            }

            EvalCell cell;
            cell.per_fold = std::move(eval.per_fold);
            cell.mean = mean_metrics(cell.per_fold, &cell.folds_with_undefined);
            report.cells[EvalCellKey{row.model,
                                     augmented ? "Original+Synthetic" : "Original",
                                     strength_name}] = std::move(cell);
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Waveform similarity
// ---------------------------------------------------------------------------

namespace {

std::vector<double> mean_waveform(const std::vector<const ERGRecord*>& records) {
    std::vector<double> mean(kSignalLength, 0.0);
    for (const auto* r : records)
        for (std::size_t t = 0; t < kSignalLength; ++t) mean[t] += r->samples[t];
    for (double& v : mean) v /= static_cast<double>(records.size());
    return mean;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const auto n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double cov = 0, va = 0, vb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    if (va <= 0.0 || vb <= 0.0) return 0.0;
    return cov / std::sqrt(va * vb);
}

double mean_peak_to_peak(const std::vector<const ERGRecord*>& records) {
    double sum = 0.0;
    for (const auto* r : records) {
        const auto [lo, hi] = std::minmax_element(r->samples.begin(), r->samples.end());
        sum += *hi - *lo;
    }
    return sum / static_cast<double>(records.size());
}

}  // namespace

SimilarityReport waveform_similarity(const Dataset& real, const Dataset& synthetic) {
    std::map<CellKey, std::vector<const ERGRecord*>> real_cells, syn_cells;
    for (const auto& r : real.records) real_cells[CellKey{r.label, r.strength}].push_back(&r);
    for (const auto& r : synthetic.records) syn_cells[CellKey{r.label, r.strength}].push_back(&r);

    SimilarityReport report;
    std::set<CellKey> all_cells;
    for (const auto& [cell, v] : real_cells) all_cells.insert(cell);
    for (const auto& [cell, v] : syn_cells) all_cells.insert(cell);

    for (const auto& cell : all_cells) {
        const auto r_it = real_cells.find(cell);
        const auto s_it = syn_cells.find(cell);
        if (r_it == real_cells.end() || s_it == syn_cells.end()) {
            report.skipped.push_back(cell);
            continue;
        }
        SimilarityCell out;
        out.n_real = static_cast<int>(r_it->second.size());
        out.n_synthetic = static_cast<int>(s_it->second.size());
        out.correlation = pearson(mean_waveform(r_it->second), mean_waveform(s_it->second));
        const double real_ptp = mean_peak_to_peak(r_it->second);
        out.amplitude_ratio = real_ptp > 0.0 ? mean_peak_to_peak(s_it->second) / real_ptp : 0.0;
        report.cells[cell] = out;
    }
    return report;
}

}  // namespace ergsyn
