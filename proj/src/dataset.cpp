#include "ergsyn/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ergsyn/errors.hpp"
#include "ergsyn/rng.hpp"

namespace ergsyn {

std::string CellKey::to_string() const {
    return std::string(ergsyn::to_string(label)) + "|" + strength.log_cd_string();
}

std::map<CellKey, int> Dataset::manifest() const {
    std::map<CellKey, int> m;
    for (const auto& r : records) ++m[CellKey{r.label, r.strength}];
    return m;
}

std::map<Provenance, int> Dataset::provenance_counts() const {
    std::map<Provenance, int> m;
    for (const auto& r : records) ++m[r.provenance];
    return m;
}

Dataset Dataset::filter_strength(FlashStrength s) const {
    Dataset out;
    for (const auto& r : records)
        if (r.strength == s) out.records.push_back(r);
    return out;
}

Dataset Dataset::filter_provenance(Provenance p) const {
    Dataset out;
    for (const auto& r : records)
        if (r.provenance == p) out.records.push_back(r);
    return out;
}

Dataset Split::training_pool() const {
    Dataset pool;
    if (folds.empty()) return pool;
    pool.records = folds.front().train.records;
    pool.records.insert(pool.records.end(), folds.front().val.records.begin(),
                        folds.front().val.records.end());
    return pool;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kCsvColumns = 5 + kSignalLength;

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

double parse_sample(std::string_view field, std::size_t line_no, std::size_t column) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(value))
        throw DataError("row " + std::to_string(line_no) + ": bad sample in column " +
                        std::to_string(column) + " ('" + std::string(field) + "')");
    return value;
}

}  // namespace

Dataset load_dataset_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty dataset file: " + path.string());

    Dataset out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        const auto fields = split_fields(line);
        if (fields.size() != kCsvColumns)
            throw DataError("row " + std::to_string(line_no) + ": expected " +
                            std::to_string(kCsvColumns) + " columns (" +
                            std::to_string(kSignalLength) + " samples), got " +
                            std::to_string(fields.size()));

        ERGRecord rec;
        rec.subject_id = std::string(fields[0]);
        try {
            rec.eye = parse_eye(fields[1]);
            rec.label = parse_label(fields[2]);
            rec.strength = FlashStrength::from_log_cd(parse_sample(fields[3], line_no, 4));
            rec.provenance = parse_provenance(fields[4]);
        } catch (const DataError& e) {
            throw DataError("row " + std::to_string(line_no) + ": " + e.what());
        }
        rec.samples.resize(kSignalLength);
        for (std::size_t i = 0; i < kSignalLength; ++i)
            rec.samples[i] = parse_sample(fields[5 + i], line_no, 6 + i);
        out.records.push_back(std::move(rec));
    }
    return out;
}

void save_dataset_csv(const Dataset& dataset, const std::filesystem::path& path) {
    std::ofstream outf(path, std::ios::binary);
    if (!outf) throw DataError("cannot write dataset file: " + path.string());

    outf << "subject_id,eye,label,strength_log_cd,provenance";
    for (std::size_t i = 0; i < kSignalLength; ++i) outf << ",s" << i;
    outf << "\n";

    char buf[40];
    for (const auto& r : dataset.records) {
        validate(r);
        outf << r.subject_id << ',' << to_string(r.eye) << ',' << to_string(r.label) << ','
             << r.strength.log_cd_string() << ',' << to_string(r.provenance);
        for (double s : r.samples) {
            std::snprintf(buf, sizeof(buf), "%.6f", s);
            outf << ',' << buf;
        }
        outf << "\n";
    }
    if (!outf) throw DataError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

namespace {

struct Unit {
    std::string stratum;
    std::vector<int> idx;  // record indices into the source dataset
};

std::string stratum_key(const SplitPlan& plan, std::string_view label_part,
                        std::string_view strength_part) {
    std::string key;
    key += plan.stratify_label ? label_part : std::string_view("*");
    key += '|';
    key += plan.stratify_strength ? strength_part : std::string_view("*");
    return key;
}

Dataset gather(const Dataset& src, const std::vector<int>& idx) {
    Dataset out;
    out.records.reserve(idx.size());
    for (int i : idx) out.records.push_back(src.records[static_cast<std::size_t>(i)]);
    return out;
}

Split assign_units(const Dataset& dataset, std::vector<Unit> units, const SplitPlan& plan) {
    if (plan.folds < 1) throw ConfigError("split plan needs at least one fold");
    if (!(plan.test_fraction >= 0.0 && plan.test_fraction < 1.0))
        throw ConfigError("test_fraction must lie in [0, 1)");

    // Group units per stratum, preserving dataset order inside each stratum.
    std::map<std::string, std::vector<Unit>> strata;
    for (auto& u : units) strata[u.stratum].push_back(std::move(u));

    std::vector<int> test_idx;
    std::vector<std::vector<int>> fold_val_idx(static_cast<std::size_t>(plan.folds));

    for (auto& [key, stratum_units] : strata) {
        Rng rng = Rng::derive(plan.seed, "split|" + key);
        rng.shuffle(stratum_units);

        std::size_t stratum_records = 0;
        for (const auto& u : stratum_units) stratum_records += u.idx.size();
        const long target = std::lround(plan.test_fraction * static_cast<double>(stratum_records));

        std::vector<const Unit*> pool;
        long taken = 0;
        for (const auto& u : stratum_units) {
            if (taken < target && taken + static_cast<long>(u.idx.size()) <= target) {
                test_idx.insert(test_idx.end(), u.idx.begin(), u.idx.end());
                taken += static_cast<long>(u.idx.size());
            } else {
                pool.push_back(&u);
            }
        }

        for (std::size_t i = 0; i < pool.size(); ++i) {
            auto& dest = fold_val_idx[i % static_cast<std::size_t>(plan.folds)];
            dest.insert(dest.end(), pool[i]->idx.begin(), pool[i]->idx.end());
        }
    }

    Split out;
    std::sort(test_idx.begin(), test_idx.end());
    out.test = gather(dataset, test_idx);

    std::vector<int> pool_idx;
    for (const auto& v : fold_val_idx) pool_idx.insert(pool_idx.end(), v.begin(), v.end());
    std::sort(pool_idx.begin(), pool_idx.end());

    for (int f = 0; f < plan.folds; ++f) {
        auto val = fold_val_idx[static_cast<std::size_t>(f)];
        std::sort(val.begin(), val.end());
        std::vector<int> train;
        std::set_difference(pool_idx.begin(), pool_idx.end(), val.begin(), val.end(),
                            std::back_inserter(train));
        out.folds.push_back(Fold{gather(dataset, train), gather(dataset, val)});
    }
    return out;
}

}  // namespace

Split split(const Dataset& dataset, const SplitPlan& plan) {
    std::vector<std::string> thin;
    for (const auto& [cell, count] : dataset.manifest()) {
        if (count < plan.folds + 1)
            thin.push_back(cell.to_string() + " has " + std::to_string(count) + " records");
    }
    if (!thin.empty()) {
        std::string msg = "infeasible split, cells too small for " + std::to_string(plan.folds) +
                          " folds:";
        for (const auto& s : thin) msg += " [" + s + "]";
        throw ConfigError(msg);
    }

    std::vector<Unit> units;
    units.reserve(dataset.records.size());
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        const auto& r = dataset.records[i];
        units.push_back(Unit{stratum_key(plan, to_string(r.label), r.strength.log_cd_string()),
                             {static_cast<int>(i)}});
    }
    return assign_units(dataset, std::move(units), plan);
}

Split subject_grouping(const Dataset& dataset, const SplitPlan& plan) {
    std::map<std::string, std::vector<int>> by_subject;
    std::vector<std::string> order;
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        const auto& r = dataset.records[i];
        if (r.subject_id.empty())
            throw DataError("record " + std::to_string(i) + " has an empty subject_id");
        auto [it, inserted] = by_subject.try_emplace(r.subject_id);
        if (inserted) order.push_back(r.subject_id);
        it->second.push_back(static_cast<int>(i));
    }

    // A subject must not dominate any (label, strength) cell beyond what the
    // training pool can absorb.
    std::map<CellKey, std::map<std::string, int>> cell_ownership;
    for (const auto& r : dataset.records)
        ++cell_ownership[CellKey{r.label, r.strength}][r.subject_id];
    std::string offending;
    for (const auto& [cell, owners] : cell_ownership) {
        int total = 0, biggest = 0;
        for (const auto& [subj, n] : owners) {
            total += n;
            biggest = std::max(biggest, n);
        }
        if (static_cast<double>(biggest) > (1.0 - plan.test_fraction) * total + 1e-9)
            offending += " [" + cell.to_string() + "]";
    }
    if (!offending.empty())
        throw ConfigError("infeasible subject-grouped split, one subject owns more than the "
                          "training share of:" + offending);

    std::vector<Unit> units;
    units.reserve(order.size());
    for (const auto& subject : order) {
        const auto& idx = by_subject[subject];
        const auto& first = dataset.records[static_cast<std::size_t>(idx.front())];
        bool same_label = true, same_strength = true;
        for (int i : idx) {
            const auto& r = dataset.records[static_cast<std::size_t>(i)];
            same_label &= (r.label == first.label);
            same_strength &= (r.strength == first.strength);
        }
        const std::string_view label_part = same_label ? to_string(first.label) : "*";
        const std::string strength_part = same_strength ? first.strength.log_cd_string() : "*";
        units.push_back(Unit{stratum_key(plan, label_part, strength_part), idx});
    }
    return assign_units(dataset, std::move(units), plan);
}

Dataset merge(const Dataset& real, const Dataset& synthetic) {
    Dataset out = real;
    out.records.insert(out.records.end(), synthetic.records.begin(), synthetic.records.end());
    return out;
}

// ---------------------------------------------------------------------------
// Oracle simulator
// ---------------------------------------------------------------------------

namespace {

void validate_params(const OracleParams& p) {
    if (p.a_amplitude <= 0.0 || p.b_amplitude <= 0.0)
        throw ConfigError("oracle lobe amplitudes must be positive");
    if (p.op_amplitude < 0.0 || p.noise_std < 0.0)
        throw ConfigError("oracle oscillation amplitude and noise stddev must be non-negative");
    if (p.b_time <= p.a_time)
        throw ConfigError("oracle late-lobe peak must come after the early trough");
}

double strength_scale(const OracleParams& p, FlashStrength s) {
    return 1.0 - p.strength_decay * static_cast<double>(s.index());
}

}  // namespace

std::vector<double> oracle_template(const OracleParams& p, Label label, FlashStrength strength) {
    validate_params(p);
    const double scale = strength_scale(p, strength);
    const bool asd = (label == Label::ASD);
    const double a_amp = p.a_amplitude * scale;
    const double b_amp = p.b_amplitude * scale * (asd ? p.asd_b_amplitude_factor : 1.0);
    const double b_t = p.b_time + (asd ? p.asd_b_time_shift : 0.0);
    const double op_amp = p.op_amplitude * scale;
    const double limb_mid = 0.5 * (p.a_time + b_t);
    const double limb_width = (b_t - p.a_time) / 3.0;

    std::vector<double> x(kSignalLength);
    for (std::size_t i = 0; i < kSignalLength; ++i) {
        const double t = static_cast<double>(i);
        const double da = (t - p.a_time) / p.a_width;
        const double db = (t - b_t) / p.b_width;
        double v = -a_amp * std::exp(-0.5 * da * da) + b_amp * std::exp(-0.5 * db * db);
        const double since_trough = t - p.a_time;
        const double dw = (t - limb_mid) / limb_width;
        v += op_amp * std::sin(2.0 * std::numbers::pi * p.op_frequency * since_trough) *
             std::exp(-p.op_damping * std::max(0.0, since_trough)) * std::exp(-0.5 * dw * dw);
        x[i] = v;
    }
    return x;
}

Dataset simulate_oracle_cells(const OracleParams& params, const std::vector<FlashStrength>& strengths,
                              int n_per_cell, std::uint64_t seed) {
    validate_params(params);
    if (n_per_cell < 1) throw ConfigError("n_per_cell must be >= 1");

    Dataset out;
    for (const Label label : {Label::ASD, Label::Control}) {
        for (const FlashStrength strength : strengths) {
            const auto base = oracle_template(params, label, strength);
            const CellKey cell{label, strength};
            for (int i = 0; i < n_per_cell; ++i) {
                Rng rng = Rng::derive(seed, "oracle|" + cell.to_string() + "|" + std::to_string(i));
                ERGRecord rec;
                rec.samples = base;
                for (double& v : rec.samples) v += params.noise_std * rng.gaussian();
                rec.label = label;
                rec.strength = strength;
                rec.subject_id = "sim-" + std::string(to_string(label)) + "-" +
                                 strength.log_cd_string() + "-" + std::to_string(i);
                rec.eye = (i % 2 == 0) ? Eye::Left : Eye::Right;
                rec.provenance = Provenance::Real;
                out.records.push_back(std::move(rec));
            }
        }
    }
    return out;
}

Dataset simulate_oracle(const OracleParams& params, int n_per_cell, std::uint64_t seed) {
    std::vector<FlashStrength> all;
    for (int i = 0; i < FlashStrength::kCount; ++i) all.push_back(FlashStrength::from_index(i));
    return simulate_oracle_cells(params, all, n_per_cell, seed);
}

Dataset simulate_oracle_reference_counts(const OracleParams& params, std::uint64_t seed) {
    validate_params(params);
    static constexpr int kAsd[FlashStrength::kCount] = {58, 60, 56, 56, 58, 60, 53, 56, 52};
    static constexpr int kControl[FlashStrength::kCount] = {59, 51, 51, 57, 56, 55, 50, 50, 53};

    Dataset out;
    for (int s = 0; s < FlashStrength::kCount; ++s) {
        const FlashStrength strength = FlashStrength::from_index(s);
        for (const Label label : {Label::ASD, Label::Control}) {
            const int n = (label == Label::ASD) ? kAsd[s] : kControl[s];
            const auto base = oracle_template(params, label, strength);
            const CellKey cell{label, strength};
            for (int i = 0; i < n; ++i) {
                Rng rng = Rng::derive(seed, "oracle|" + cell.to_string() + "|" + std::to_string(i));
                ERGRecord rec;
                rec.samples = base;
                for (double& v : rec.samples) v += params.noise_std * rng.gaussian();
                rec.label = label;
                rec.strength = strength;
                rec.subject_id = "sim-" + std::string(to_string(label)) + "-" +
                                 strength.log_cd_string() + "-" + std::to_string(i);
                rec.eye = (i % 2 == 0) ? Eye::Left : Eye::Right;
                out.records.push_back(std::move(rec));
            }
        }
    }
    return out;
}

}  // namespace ergsyn
