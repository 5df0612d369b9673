#include "ergsyn/cgan.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "ergsyn/checkpoint.hpp"
#include "ergsyn/errors.hpp"
#include "ergsyn/normalize.hpp"
#include "ergsyn/tst.hpp"

namespace ergsyn {

using nn::Mat;
using nn::Vec;

Eigen::RowVectorXd ConditionCode::encode() const {
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(kDim);
    v[label == Label::ASD ? 0 : 1] = 1.0;
    v[2 + strength.index()] = 1.0;
    return v;
}

LatentSeed LatentSeed::from_seed(std::uint64_t seed, int seq_len) {
    LatentSeed s;
    s.rng_seed = seed;
    Rng rng = Rng::derive(seed, "latent");
    s.z.resize(static_cast<std::size_t>(seq_len));
    for (double& v : s.z) v = rng.gaussian();
    return s;
}

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

namespace {

constexpr int kStepInput = 1 + ConditionCode::kDim;

// Per-step input rows [value_t | condition].
std::vector<Mat> assemble_steps(const Mat& values, const std::vector<Eigen::RowVectorXd>& conds) {
    const auto n = values.rows();
    const auto seq = values.cols();
    Mat cond_block(n, ConditionCode::kDim);
    for (Eigen::Index i = 0; i < n; ++i) cond_block.row(i) = conds[static_cast<std::size_t>(i)];

    std::vector<Mat> xs(static_cast<std::size_t>(seq));
    for (Eigen::Index t = 0; t < seq; ++t) {
        Mat x(n, kStepInput);
        x.col(0) = values.col(t);
        x.rightCols(ConditionCode::kDim) = cond_block;
        xs[static_cast<std::size_t>(t)] = std::move(x);
    }
    return xs;
}

}  // namespace

Generator::Generator(const GanConfig& config, Rng& rng)
    : config_(config),
      rnn_("g.rnn", kStepInput, config.hidden, rng),
      fc1_("g.fc1", 2 * config.hidden, 2 * config.hidden, rng),
      fc2_("g.fc2", 2 * config.hidden, 2 * config.hidden, rng),
      out_("g.out", 2 * config.hidden, config.seq_len, rng),
      act1_(config.leaky_slope),
      act2_(config.leaky_slope),
      drop1_(config.dropout),
      drop2_(config.dropout) {}

Mat Generator::forward(const Mat& z, const std::vector<Eigen::RowVectorXd>& conds, bool train,
                       Rng& rng) {
    if (z.cols() != config_.seq_len) throw DataError("latent length does not match seq_len");
    xs_ = assemble_steps(z, conds);
    Mat h = rnn_.forward_final(xs_);
    h = drop1_.forward(act1_.forward(fc1_.forward(h)), train, rng);
    h = drop2_.forward(act2_.forward(fc2_.forward(h)), train, rng);
    return out_.forward(h);
}

void Generator::backward(const Mat& dy) {
    Mat d = out_.backward(dy);
    d = fc2_.backward(act2_.backward(drop2_.backward(d)));
    d = fc1_.backward(act1_.backward(drop1_.backward(d)));
    rnn_.backward_final(d);
}

nn::ParamRefs Generator::params() {
    nn::ParamRefs out = rnn_.params();
    for (nn::Linear* l : {&fc1_, &fc2_, &out_}) {
        const auto p = l->params();
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

Discriminator::Discriminator(const GanConfig& config, Rng& rng)
    : config_(config),
      rnn_("d.rnn", kStepInput, config.hidden, rng),
      fc1_("d.fc1", 2 * config.hidden, 2 * config.hidden, rng),
      fc2_("d.fc2", 2 * config.hidden, config.hidden, rng),
      out_("d.out", config.hidden, 1, rng),
      act1_(config.leaky_slope),
      act2_(config.leaky_slope),
      drop1_(config.dropout),
      drop2_(config.dropout) {}

Vec Discriminator::forward_logits(const Mat& signals, const std::vector<Eigen::RowVectorXd>& conds,
                                  bool train, Rng& rng) {
    if (signals.cols() != config_.seq_len) throw DataError("signal length does not match seq_len");
    xs_ = assemble_steps(signals, conds);
    Mat h = rnn_.forward_final(xs_);
    h = drop1_.forward(act1_.forward(fc1_.forward(h)), train, rng);
    h = drop2_.forward(act2_.forward(fc2_.forward(h)), train, rng);
    return out_.forward(h).col(0);
}

Mat Discriminator::backward(const Vec& dlogits) {
    Mat d = out_.backward(dlogits);
    d = fc2_.backward(act2_.backward(drop2_.backward(d)));
    d = fc1_.backward(act1_.backward(drop1_.backward(d)));
    const std::vector<Mat> dxs = rnn_.backward_final(d);

    Mat dsignals(dlogits.size(), config_.seq_len);
    for (Eigen::Index t = 0; t < config_.seq_len; ++t)
        dsignals.col(t) = dxs[static_cast<std::size_t>(t)].col(0);
    return dsignals;
}

nn::ParamRefs Discriminator::params() {
    nn::ParamRefs out = rnn_.params();
    for (nn::Linear* l : {&fc1_, &fc2_, &out_}) {
        const auto p = l->params();
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Checkpoint serialization
// ---------------------------------------------------------------------------

namespace {

nlohmann::json config_to_json(const GanConfig& c) {
    return {{"hidden", c.hidden},
            {"seq_len", c.seq_len},
            {"dropout", c.dropout},
            {"leaky_slope", c.leaky_slope},
            {"epochs", c.epochs},
            {"batch", c.batch},
            {"lr", c.lr},
            {"adam_beta1", c.adam_beta1},
            {"adam_beta2", c.adam_beta2},
            {"checkpoint_every", c.checkpoint_every},
            {"holdback_fraction", c.holdback_fraction},
            {"seed", c.seed}};
}

GanConfig config_from_json(const nlohmann::json& j) {
    GanConfig c;
    c.hidden = j.at("hidden");
    c.seq_len = j.at("seq_len");
    c.dropout = j.at("dropout");
    c.leaky_slope = j.at("leaky_slope");
    c.epochs = j.at("epochs");
    c.batch = j.at("batch");
    c.lr = j.at("lr");
    c.adam_beta1 = j.at("adam_beta1");
    c.adam_beta2 = j.at("adam_beta2");
    c.checkpoint_every = j.at("checkpoint_every");
    c.holdback_fraction = j.at("holdback_fraction");
    c.seed = j.at("seed");
    return c;
}

Mat vec_to_row(const std::vector<double>& v) {
    Mat m(1, static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) m(0, static_cast<Eigen::Index>(i)) = v[i];
    return m;
}

std::vector<double> row_to_vec(const Mat& m) {
    std::vector<double> v(static_cast<std::size_t>(m.cols()));
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = m(0, static_cast<Eigen::Index>(i));
    return v;
}

}  // namespace

void GanCheckpoint::save(const std::filesystem::path& path) const {
    CheckpointContainer c;
    c.payload_tag = "cgan";
    c.config_json = config_to_json(config).dump();
    c.tensors = tensors;
    c.tensors["curves.g_loss"] = vec_to_row(curves.g_loss);
    c.tensors["curves.d_loss"] = vec_to_row(curves.d_loss);
    c.tensors["curves.d_acc_real"] = vec_to_row(curves.d_acc_real);
    c.tensors["curves.d_acc_fake"] = vec_to_row(curves.d_acc_fake);
    c.ints["epoch"] = epoch;
    c.strings["rng_state"] = rng_state;

    nlohmann::json norms = nlohmann::json::array();
    for (const auto& [cell, norm] : cell_norms) {
        norms.push_back({{"label", std::string(to_string(cell.label))},
                         {"strength_index", cell.strength.index()},
                         {"lo", norm.lo},
                         {"hi", norm.hi}});
    }
    c.strings["cell_norms"] = norms.dump();

    std::ostringstream manifest;
    for (std::size_t i = 0; i < training_manifest.size(); ++i) {
        if (i) manifest << ',';
        manifest << std::hex << training_manifest[i];
    }
    c.strings["training_manifest"] = manifest.str();
    c.save(path);
}

GanCheckpoint GanCheckpoint::load(const std::filesystem::path& path) {
    CheckpointContainer c = CheckpointContainer::load(path);
    if (c.payload_tag != "cgan")
        throw DataError("checkpoint payload is '" + c.payload_tag + "', expected 'cgan'");

    GanCheckpoint ck;
    ck.config = config_from_json(nlohmann::json::parse(c.config_json));
    ck.curves.g_loss = row_to_vec(c.tensors.at("curves.g_loss"));
    ck.curves.d_loss = row_to_vec(c.tensors.at("curves.d_loss"));
    ck.curves.d_acc_real = row_to_vec(c.tensors.at("curves.d_acc_real"));
    ck.curves.d_acc_fake = row_to_vec(c.tensors.at("curves.d_acc_fake"));
    for (const char* key : {"curves.g_loss", "curves.d_loss", "curves.d_acc_real",
                            "curves.d_acc_fake"})
        c.tensors.erase(key);
    ck.tensors = std::move(c.tensors);
    ck.epoch = static_cast<int>(c.ints.at("epoch"));
    ck.rng_state = c.strings.at("rng_state");

    for (const auto& j : nlohmann::json::parse(c.strings.at("cell_norms"))) {
        const CellKey cell{parse_label(j.at("label").get<std::string>()),
                           FlashStrength::from_index(j.at("strength_index"))};
        ck.cell_norms[cell] = CellNorm{j.at("lo"), j.at("hi")};
    }

    const std::string manifest = c.strings.at("training_manifest");
    std::istringstream ms(manifest);
    std::string token;
    while (std::getline(ms, token, ','))
        if (!token.empty()) ck.training_manifest.push_back(std::stoull(token, nullptr, 16));
    return ck;
}

// ---------------------------------------------------------------------------
// Inference session
// ---------------------------------------------------------------------------

namespace {

void load_params(nn::ParamRefs params, const std::map<std::string, Mat>& tensors) {
    for (nn::Param* p : params) {
        const auto it = tensors.find(p->name);
        if (it == tensors.end()) throw DataError("checkpoint is missing tensor " + p->name);
        if (it->second.rows() != p->value.rows() || it->second.cols() != p->value.cols())
            throw DataError("checkpoint tensor shape mismatch for " + p->name);
        p->value = it->second;
    }
}

}  // namespace

GanSession::GanSession(const GanCheckpoint& checkpoint)
    : checkpoint_(&checkpoint),
      generator_([&] {
          Rng init(0);
          return Generator(checkpoint.config, init);
      }()),
      discriminator_([&] {
          Rng init(0);
          return Discriminator(checkpoint.config, init);
      }()) {
    load_params(generator_.params(), checkpoint.tensors);
    load_params(discriminator_.params(), checkpoint.tensors);
}

ERGRecord GanSession::generate(const ConditionCode& condition, const LatentSeed& seed) {
    const auto cell_it = checkpoint_->cell_norms.find(CellKey{condition.label, condition.strength});
    if (cell_it == checkpoint_->cell_norms.end())
        throw DataError("invalid condition: cell " +
                        CellKey{condition.label, condition.strength}.to_string() +
                        " was not present in GAN training data");
    if (seed.z.size() != static_cast<std::size_t>(checkpoint_->config.seq_len))
        throw DataError("latent vector length does not match the checkpoint seq_len");

    Mat z(1, checkpoint_->config.seq_len);
    for (Eigen::Index t = 0; t < z.cols(); ++t) z(0, t) = seed.z[static_cast<std::size_t>(t)];
    const Mat y = generator_.forward(z, {condition.encode()}, false, null_rng_);

    NormParams inv{NormMode::MinMax, cell_it->second.lo, cell_it->second.hi, false};
    ERGRecord rec;
    rec.samples.resize(static_cast<std::size_t>(y.cols()));
    for (Eigen::Index t = 0; t < y.cols(); ++t)
        rec.samples[static_cast<std::size_t>(t)] = inv.invert(y(0, t));
    rec.label = condition.label;
    rec.strength = condition.strength;
    rec.provenance = Provenance::Synthetic;
    rec.eye = Eye::Unknown;
    std::ostringstream id;
    id << "synthetic-" << std::hex << seed.rng_seed;
    rec.subject_id = id.str();
    return rec;
}

double GanSession::discriminate(std::span<const double> signal, const ConditionCode& condition) {
    Mat m(1, static_cast<Eigen::Index>(signal.size()));
    for (std::size_t t = 0; t < signal.size(); ++t) m(0, static_cast<Eigen::Index>(t)) = signal[t];
    return discriminate_batch(m, {condition})[0];
}

nn::Vec GanSession::discriminate_batch(const Mat& signals,
                                       const std::vector<ConditionCode>& conditions) {
    if (signals.cols() != checkpoint_->config.seq_len)
        throw DataError("signal length does not match the checkpoint seq_len");
    if (signals.rows() != static_cast<Eigen::Index>(conditions.size()))
        throw DataError("one condition per signal required");

    // The discriminator was trained on per-signal min-max space.
    Mat norm(signals.rows(), signals.cols());
    for (Eigen::Index i = 0; i < signals.rows(); ++i) {
        const double lo = signals.row(i).minCoeff();
        const double hi = signals.row(i).maxCoeff();
        if (hi > lo)
            norm.row(i) = (signals.row(i).array() - lo) * (2.0 / (hi - lo)) - 1.0;
        else
            norm.row(i).setZero();
    }
    std::vector<Eigen::RowVectorXd> conds;
    conds.reserve(conditions.size());
    for (const auto& c : conditions) conds.push_back(c.encode());

    Vec logits = discriminator_.forward_logits(norm, conds, false, null_rng_);
    Vec scores(logits.size());
    for (Eigen::Index i = 0; i < logits.size(); ++i) {
        const double s = 1.0 / (1.0 + std::exp(-logits[i]));
        scores[i] = std::clamp(s, 1e-12, 1.0 - 1e-12);
    }
    return scores;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

namespace {

struct PreparedData {
    Mat signals;  // [N x seq], per-record min-max space
    std::vector<Eigen::RowVectorXd> conds;
    std::vector<ConditionCode> codes;
    std::map<CellKey, CellNorm> cell_norms;
    std::vector<std::uint64_t> manifest;
};

PreparedData prepare(const Dataset& train, int seq_len) {
    if (train.empty()) throw DataError("GAN training set is empty");
    if (static_cast<std::size_t>(seq_len) != kSignalLength)
        throw ConfigError("seq_len must equal the record length for training");

    std::map<int, std::array<int, 2>> labels_per_strength;
    for (const auto& r : train.records)
        ++labels_per_strength[r.strength.index()][r.label == Label::ASD ? 0 : 1];
    for (const auto& [s, counts] : labels_per_strength) {
        if (counts[0] == 0 || counts[1] == 0)
            throw DataError("invalid dataset: strength " +
                            FlashStrength::from_index(s).log_cd_string() +
                            " lacks one of the condition classes");
    }

    PreparedData d;
    const auto n = static_cast<Eigen::Index>(train.size());
    d.signals.resize(n, seq_len);
    d.conds.reserve(train.size());
    d.codes.reserve(train.size());

    std::map<CellKey, std::pair<double, double>> sums;  // (sum lo, sum hi)
    std::map<CellKey, int> counts;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& rec = train.records[static_cast<std::size_t>(i)];
        const NormalizedRecord nr = normalize(rec, NormMode::MinMax);
        for (Eigen::Index t = 0; t < seq_len; ++t)
            d.signals(i, t) = nr.record.samples[static_cast<std::size_t>(t)];
        const ConditionCode code{rec.label, rec.strength};
        d.conds.push_back(code.encode());
        d.codes.push_back(code);
        const CellKey cell{rec.label, rec.strength};
        sums[cell].first += nr.params.a;
        sums[cell].second += nr.params.degenerate ? nr.params.a : nr.params.b;
        ++counts[cell];
        d.manifest.push_back(record_hash(rec));
    }
    for (const auto& [cell, s] : sums)
        d.cell_norms[cell] = CellNorm{s.first / counts[cell], s.second / counts[cell]};
    std::sort(d.manifest.begin(), d.manifest.end());
    return d;
}

GanCheckpoint make_checkpoint(const GanConfig& config, Generator& g, Discriminator& d,
                              const nn::Adam& opt_g, const nn::Adam& opt_d, int epoch,
                              const TrainingCurves& curves, const Rng& rng,
                              const PreparedData& data) {
    GanCheckpoint ck;
    ck.config = config;
    ck.epoch = epoch;
    ck.curves = curves;
    ck.rng_state = rng.state_string();
    ck.cell_norms = data.cell_norms;
    ck.training_manifest = data.manifest;

    auto store = [&ck](nn::ParamRefs params) {
        for (const nn::Param* p : params) ck.tensors[p->name] = p->value;
    };
    store(g.params());
    store(d.params());

    auto store_opt = [&ck](const nn::Adam& opt, nn::ParamRefs params, const std::string& prefix) {
        if (opt.m().empty()) return;
        for (std::size_t i = 0; i < params.size(); ++i) {
            ck.tensors[prefix + params[i]->name + ".m"] = opt.m()[i];
            ck.tensors[prefix + params[i]->name + ".v"] = opt.v()[i];
        }
        ck.tensors[prefix + "t"] = Mat::Constant(1, 1, static_cast<double>(opt.t()));
    };
    store_opt(opt_g, g.params(), "opt.");
    store_opt(opt_d, d.params(), "opt.");
    return ck;
}

double holdback_gap(const GanCheckpoint& ck, const std::vector<ERGRecord>& holdback,
                    std::uint64_t seed) {
    if (holdback.empty()) return 0.0;
    GanSession session(ck);
    const double acc = gan_real_fake_accuracy(session, holdback, seed);
    return std::abs(acc - 0.5);
}

}  // namespace

GanCheckpoint train_gan(const Dataset& train, const GanConfig& config, const CheckpointHook& hook) {
    const PreparedData data = prepare(train, config.seq_len);
    const auto n_total = static_cast<std::size_t>(data.signals.rows());

    Rng init_rng = Rng::derive(config.seed, "gan|init");
    Generator gen(config, init_rng);
    Discriminator dis(config, init_rng);

    nn::Adam opt_g, opt_d;
    for (nn::Adam* opt : {&opt_g, &opt_d}) {
        opt->lr = config.lr;
        opt->beta1 = config.adam_beta1;
        opt->beta2 = config.adam_beta2;
    }

    // Held-back slice for checkpoint selection; never used for updates.
    std::vector<std::size_t> all_idx(n_total);
    for (std::size_t i = 0; i < n_total; ++i) all_idx[i] = i;
    Rng hold_rng = Rng::derive(config.seed, "gan|holdback");
    hold_rng.shuffle(all_idx);
    const auto n_hold = static_cast<std::size_t>(
        std::lround(config.holdback_fraction * static_cast<double>(n_total)));
    std::vector<ERGRecord> holdback;
    for (std::size_t i = 0; i < n_hold; ++i)
        holdback.push_back(train.records[all_idx[i]]);
    std::vector<std::size_t> train_idx(all_idx.begin() + static_cast<std::ptrdiff_t>(n_hold),
                                       all_idx.end());
    if (train_idx.empty()) throw DataError("holdback fraction leaves no training records");

    Rng rng = Rng::derive(config.seed, "gan|train");
    TrainingCurves curves;
    double best_gap = 2.0;
    GanCheckpoint best;
    GanCheckpoint last = make_checkpoint(config, gen, dis, opt_g, opt_d, 0, curves, rng, data);

    const auto seq = static_cast<Eigen::Index>(config.seq_len);
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        rng.shuffle(train_idx);

        double g_loss_sum = 0.0, d_loss_sum = 0.0;
        double real_correct = 0.0, fake_correct = 0.0;
        std::size_t n_batches = 0, n_scored = 0;

        for (std::size_t start = 0; start < train_idx.size(); start += static_cast<std::size_t>(config.batch)) {
            const auto m = static_cast<Eigen::Index>(
                std::min<std::size_t>(static_cast<std::size_t>(config.batch), train_idx.size() - start));

            Mat real(m, seq);
            std::vector<Eigen::RowVectorXd> conds(static_cast<std::size_t>(m));
            for (Eigen::Index i = 0; i < m; ++i) {
                const std::size_t src = train_idx[start + static_cast<std::size_t>(i)];
                real.row(i) = data.signals.row(static_cast<Eigen::Index>(src));
                conds[static_cast<std::size_t>(i)] = data.conds[src];
            }

            // Discriminator step on a balanced real/fake batch.
            Mat z(m, seq);
            for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = rng.gaussian();
            const Mat fake = gen.forward(z, conds, true, rng);

            Mat both(2 * m, seq);
            both.topRows(m) = real;
            both.bottomRows(m) = fake;
            std::vector<Eigen::RowVectorXd> conds2(conds);
            conds2.insert(conds2.end(), conds.begin(), conds.end());

            nn::zero_grads(dis.params());
            const Vec logits = dis.forward_logits(both, conds2, true, rng);
            Vec targets = Vec::Zero(2 * m);
            targets.head(m).setOnes();
            Vec dlogits;
            const double d_loss = nn::bce_with_logits(logits, targets, &dlogits);
            dis.backward(dlogits);
            opt_d.step(dis.params());

            for (Eigen::Index i = 0; i < m; ++i) {
                real_correct += logits[i] > 0.0 ? 1.0 : 0.0;
                fake_correct += logits[m + i] < 0.0 ? 1.0 : 0.0;
            }
            n_scored += static_cast<std::size_t>(m);

            // Generator step: drive D(G(z|y)) towards the real target.
            Mat z2(m, seq);
            for (Eigen::Index i = 0; i < z2.size(); ++i) z2.data()[i] = rng.gaussian();
            nn::zero_grads(gen.params());
            nn::zero_grads(dis.params());
            const Mat fake2 = gen.forward(z2, conds, true, rng);
            const Vec logits2 = dis.forward_logits(fake2, conds, true, rng);
            const Vec ones = Vec::Ones(m);
            Vec dlogits2;
            const double g_loss = nn::bce_with_logits(logits2, ones, &dlogits2);
            const Mat dfake = dis.backward(dlogits2);
            gen.backward(dfake);
            opt_g.step(gen.params());

            g_loss_sum += g_loss;
            d_loss_sum += d_loss;
            ++n_batches;
        }

        curves.g_loss.push_back(g_loss_sum / static_cast<double>(n_batches));
        curves.d_loss.push_back(d_loss_sum / static_cast<double>(n_batches));
        curves.d_acc_real.push_back(real_correct / static_cast<double>(n_scored));
        curves.d_acc_fake.push_back(fake_correct / static_cast<double>(n_scored));

        if (!std::isfinite(curves.g_loss.back()) || !std::isfinite(curves.d_loss.back()))
            throw TrainingDivergedError(epoch, std::make_shared<GanCheckpoint>(std::move(last)));

        if (epoch % config.checkpoint_every == 0 || epoch == config.epochs) {
            last = make_checkpoint(config, gen, dis, opt_g, opt_d, epoch, curves, rng, data);
            const double gap =
                holdback_gap(last, holdback, fnv1a64("probe") ^ (config.seed + static_cast<std::uint64_t>(epoch)));
            const bool is_best = gap < best_gap;
            if (is_best) {
                best_gap = gap;
                best = last;
            }
            if (hook) hook(last, is_best);
        }
    }

    return make_checkpoint(config, gen, dis, opt_g, opt_d, config.epochs, curves, rng, data);
}

double gan_real_fake_accuracy(GanSession& session, const std::vector<ERGRecord>& records,
                              std::uint64_t seed) {
    if (records.empty()) throw DataError("accuracy probe needs at least one record");
    const auto seq = static_cast<Eigen::Index>(session.checkpoint().config.seq_len);
    const auto m = static_cast<Eigen::Index>(records.size());

    Mat signals(2 * m, seq);
    std::vector<ConditionCode> conds;
    conds.reserve(2 * records.size());
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& rec = records[static_cast<std::size_t>(i)];
        for (Eigen::Index t = 0; t < seq; ++t)
            signals(i, t) = rec.samples[static_cast<std::size_t>(t)];
        conds.push_back(ConditionCode{rec.label, rec.strength});
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        const ConditionCode code = conds[static_cast<std::size_t>(i)];
        const ERGRecord fake = session.generate(
            code, LatentSeed::from_seed(seed ^ static_cast<std::uint64_t>(i) * 0x9e3779b9ull,
                                        static_cast<int>(seq)));
        for (Eigen::Index t = 0; t < seq; ++t)
            signals(m + i, t) = fake.samples[static_cast<std::size_t>(t)];
        conds.push_back(code);
    }

    const Vec scores = session.discriminate_batch(signals, conds);
    double correct = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        correct += scores[i] > 0.5 ? 1.0 : 0.0;
        correct += scores[m + i] < 0.5 ? 1.0 : 0.0;
    }
    return correct / static_cast<double>(2 * m);
}

FidelityReport condition_fidelity(const GanCheckpoint& checkpoint, TstModel& probe, int n,
                                  std::uint64_t seed) {
    if (n < 1) throw ConfigError("condition_fidelity needs n >= 1");
    GanSession session(checkpoint);

    FidelityReport report;
    double match_total = 0.0;
    std::size_t count_total = 0;
    for (const auto& [cell, norm] : checkpoint.cell_norms) {
        Dataset generated;
        for (int i = 0; i < n; ++i) {
            const std::uint64_t s = fnv1a64(cell.to_string()) ^ (seed + static_cast<std::uint64_t>(i));
            generated.records.push_back(session.generate(
                ConditionCode{cell.label, cell.strength},
                LatentSeed::from_seed(s, checkpoint.config.seq_len)));
        }
        const std::vector<double> p_asd = tst_predict(probe, generated);
        double match = 0.0;
        for (double p : p_asd) {
            const Label predicted = p > 0.5 ? Label::ASD : Label::Control;
            match += predicted == cell.label ? 1.0 : 0.0;
        }
        report.per_cell[cell] = match / static_cast<double>(n);
        match_total += match;
        count_total += static_cast<std::size_t>(n);
    }
    report.overall = count_total ? match_total / static_cast<double>(count_total) : 0.0;
    return report;
}

}  // namespace ergsyn
