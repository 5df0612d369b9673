#include "ergsyn/tst.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "ergsyn/checkpoint.hpp"
#include "ergsyn/errors.hpp"

namespace ergsyn {

using nn::Mat;
using nn::Vec;

namespace {

nlohmann::json config_to_json(const TstConfig& c) {
    return {{"width", c.width},
            {"heads", c.heads},
            {"layers", c.layers},
            {"ff", c.ff},
            {"dropout", c.dropout},
            {"seq_len", c.seq_len},
            {"positional", static_cast<int>(c.positional)},
            {"batch", c.batch},
            {"lr", c.lr},
            {"max_epochs", c.max_epochs},
            {"patience", c.patience},
            {"class_weight_control", c.class_weight_control},
            {"class_weight_asd", c.class_weight_asd},
            {"seed", c.seed}};
}

TstConfig config_from_json(const nlohmann::json& j) {
    TstConfig c;
    c.width = j.at("width");
    c.heads = j.at("heads");
    c.layers = j.at("layers");
    c.ff = j.at("ff");
    c.dropout = j.at("dropout");
    c.seq_len = j.at("seq_len");
    c.positional = static_cast<TstConfig::Positional>(j.at("positional").get<int>());
    c.batch = j.at("batch");
    c.lr = j.at("lr");
    c.max_epochs = j.at("max_epochs");
    c.patience = j.at("patience");
    c.class_weight_control = j.at("class_weight_control");
    c.class_weight_asd = j.at("class_weight_asd");
    c.seed = j.at("seed");
    return c;
}

}  // namespace

TstModel::TstModel(const TstConfig& config, Rng& rng)
    : config_(config),
      embed_("tst.embed", 1, config.width, rng),
      final_ln_("tst.final_ln", config.width),
      head_("tst.head", config.width, 2, rng) {
    if (config.width % config.heads != 0)
        throw ConfigError("embedding width must be divisible by head count");
    if (config.positional == TstConfig::Positional::Learned) {
        learned_pos_.emplace("tst.pos", config.seq_len, config.width);
        for (Eigen::Index i = 0; i < learned_pos_->value.size(); ++i)
            learned_pos_->value.data()[i] = 0.02 * rng.gaussian();
    } else if (config.positional == TstConfig::Positional::Sinusoidal) {
        sin_pos_ = nn::sinusoidal_encoding(config.seq_len, config.width);
    }
    blocks_.reserve(static_cast<std::size_t>(config.layers));
    for (int l = 0; l < config.layers; ++l)
        blocks_.emplace_back("tst.block" + std::to_string(l), config.width, config.heads,
                             config.ff, config.dropout, rng);
}

Mat TstModel::forward_logits(const Mat& signals, bool train, Rng& rng) {
    if (signals.cols() != config_.seq_len)
        throw DataError("signal length " + std::to_string(signals.cols()) +
                        " does not match model seq_len " + std::to_string(config_.seq_len));
    const auto n = signals.rows();
    const auto seq = static_cast<Eigen::Index>(config_.seq_len);
    batch_ = n;

    Mat stacked(n * seq, 1);
    for (Eigen::Index b = 0; b < n; ++b)
        for (Eigen::Index t = 0; t < seq; ++t)
            stacked(b * seq + t, 0) = (signals(b, t) - input_mean) / input_std;

    Mat x = embed_.forward(stacked);
    if (config_.positional == TstConfig::Positional::Sinusoidal) {
        for (Eigen::Index b = 0; b < n; ++b) x.middleRows(b * seq, seq) += sin_pos_;
    } else if (config_.positional == TstConfig::Positional::Learned) {
        for (Eigen::Index b = 0; b < n; ++b) x.middleRows(b * seq, seq) += learned_pos_->value;
    }

    for (auto& block : blocks_) x = block.forward(x, n, seq, train, rng);
    x = final_ln_.forward(x);

    Mat pooled(n, config_.width);
    for (Eigen::Index b = 0; b < n; ++b)
        pooled.row(b) = x.middleRows(b * seq, seq).colwise().mean();
    return head_.forward(pooled);
}

void TstModel::backward(const Mat& dlogits) {
    const auto n = batch_;
    const auto seq = static_cast<Eigen::Index>(config_.seq_len);
    const Mat dpooled = head_.backward(dlogits);

    Mat dx(n * seq, config_.width);
    for (Eigen::Index b = 0; b < n; ++b)
        dx.middleRows(b * seq, seq) =
            (dpooled.row(b) / static_cast<double>(seq)).replicate(seq, 1);

    dx = final_ln_.backward(dx);
    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) dx = it->backward(dx);

    if (config_.positional == TstConfig::Positional::Learned) {
        for (Eigen::Index b = 0; b < n; ++b) learned_pos_->grad += dx.middleRows(b * seq, seq);
    }
    embed_.backward(dx);
}

nn::ParamRefs TstModel::params() {
    nn::ParamRefs out = embed_.params();
    if (learned_pos_) out.push_back(&*learned_pos_);
    for (auto& block : blocks_) {
        const auto p = block.params();
        out.insert(out.end(), p.begin(), p.end());
    }
    const auto lp = final_ln_.params();
    out.insert(out.end(), lp.begin(), lp.end());
    const auto hp = head_.params();
    out.insert(out.end(), hp.begin(), hp.end());
    return out;
}

void TstModel::save(const std::filesystem::path& path) const {
    CheckpointContainer c;
    c.payload_tag = "tst";
    c.config_json = config_to_json(config_).dump();
    for (const nn::Param* p : const_cast<TstModel*>(this)->params()) c.tensors[p->name] = p->value;
    c.tensors["input_mean"] = Mat::Constant(1, 1, input_mean);
    c.tensors["input_std"] = Mat::Constant(1, 1, input_std);
    c.save(path);
}

TstModel TstModel::load(const std::filesystem::path& path) {
    CheckpointContainer c = CheckpointContainer::load(path);
    if (c.payload_tag != "tst")
        throw DataError("checkpoint payload is '" + c.payload_tag + "', expected 'tst'");
    Rng init(0);
    TstModel model(config_from_json(nlohmann::json::parse(c.config_json)), init);
    for (nn::Param* p : model.params()) {
        const auto it = c.tensors.find(p->name);
        if (it == c.tensors.end()) throw DataError("checkpoint is missing tensor " + p->name);
        p->value = it->second;
    }
    model.input_mean = c.tensors.at("input_mean")(0, 0);
    model.input_std = c.tensors.at("input_std")(0, 0);
    return model;
}

Mat tst_forward(TstModel& model, const Mat& signals) {
    Rng rng(0);
    return nn::softmax_rows(model.forward_logits(signals, false, rng));
}

Mat dataset_to_matrix(const Dataset& dataset) {
    Mat m(static_cast<Eigen::Index>(dataset.size()), static_cast<Eigen::Index>(kSignalLength));
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        validate(dataset.records[i]);
        for (std::size_t t = 0; t < kSignalLength; ++t)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) =
                dataset.records[i].samples[t];
    }
    return m;
}

std::vector<int> dataset_labels(const Dataset& dataset) {
    std::vector<int> labels(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) labels[i] = label_index(dataset.records[i].label);
    return labels;
}

namespace {

Vec fold_class_weights(const TstConfig& config, const std::vector<int>& labels) {
    Vec w(2);
    if (config.class_weight_control > 0.0 || config.class_weight_asd > 0.0) {
        w << config.class_weight_control, config.class_weight_asd;
        return w;
    }
    double n0 = 0, n1 = 0;
    for (int y : labels) (y == 0 ? n0 : n1) += 1.0;
    const double total = n0 + n1;
    w << total / (2.0 * n0), total / (2.0 * n1);
    return w;
}

double eval_loss(TstModel& model, const Mat& signals, const std::vector<int>& labels,
                 const Vec& weights) {
    Rng rng(0);
    const Mat logits = model.forward_logits(signals, false, rng);
    return nn::weighted_softmax_ce(logits, labels, weights);
}

}  // namespace

TstTrainResult tst_train(const std::vector<Fold>& folds, const TstConfig& config) {
    if (folds.empty()) throw ConfigError("tst_train needs at least one fold");

    TstTrainResult result;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        const Fold& fold = folds[f];
        const auto train_labels = dataset_labels(fold.train);
        const auto val_labels = dataset_labels(fold.val);
        const bool has0 = std::count(train_labels.begin(), train_labels.end(), 0) > 0;
        const bool has1 = std::count(train_labels.begin(), train_labels.end(), 1) > 0;
        if (!has0 || !has1)
            throw ConfigError("invalid fold " + std::to_string(f) +
                              ": training split contains a single class");
        if (fold.val.empty())
            throw ConfigError("invalid fold " + std::to_string(f) + ": empty validation split");

        const Mat train_x = dataset_to_matrix(fold.train);
        const Mat val_x = dataset_to_matrix(fold.val);
        const Vec weights = fold_class_weights(config, train_labels);

        Rng init = Rng::derive(config.seed, "tst|init|" + std::to_string(f));
        TstModel model(config, init);
        model.input_mean = train_x.mean();
        const double var = (train_x.array() - model.input_mean).square().mean();
        model.input_std = std::sqrt(std::max(var, 1e-12));

        nn::Adam opt;
        opt.lr = config.lr;

        Rng rng = Rng::derive(config.seed, "tst|train|" + std::to_string(f));
        std::vector<std::size_t> order(fold.train.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

        FoldHistory history;
        double best_val = std::numeric_limits<double>::infinity();
        std::vector<Mat> best_params = nn::snapshot(model.params());
        int best_epoch = 0;

        for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
            rng.shuffle(order);
            double train_loss_sum = 0.0;
            std::size_t n_batches = 0;
            for (std::size_t start = 0; start < order.size();
                 start += static_cast<std::size_t>(config.batch)) {
                const auto m = static_cast<Eigen::Index>(std::min<std::size_t>(
                    static_cast<std::size_t>(config.batch), order.size() - start));
                Mat xb(m, train_x.cols());
                std::vector<int> yb(static_cast<std::size_t>(m));
                for (Eigen::Index i = 0; i < m; ++i) {
                    const std::size_t src = order[start + static_cast<std::size_t>(i)];
                    xb.row(i) = train_x.row(static_cast<Eigen::Index>(src));
                    yb[static_cast<std::size_t>(i)] = train_labels[src];
                }
                nn::zero_grads(model.params());
                const Mat logits = model.forward_logits(xb, true, rng);
                Mat dlogits;
                train_loss_sum += nn::weighted_softmax_ce(logits, yb, weights, &dlogits);
                model.backward(dlogits);
                opt.step(model.params());
                ++n_batches;
            }
            history.train_loss.push_back(train_loss_sum / static_cast<double>(n_batches));

            const double val_loss = eval_loss(model, val_x, val_labels, weights);
            history.val_loss.push_back(val_loss);
            if (val_loss < best_val - 1e-12) {
                best_val = val_loss;
                best_epoch = epoch;
                best_params = nn::snapshot(model.params());
            }
            if (epoch - best_epoch >= config.patience) break;
        }

        nn::restore(model.params(), best_params);
        history.best_epoch = best_epoch;
        result.models.push_back(std::move(model));
        result.histories.push_back(std::move(history));
    }
    return result;
}

std::vector<double> tst_predict(TstModel& model, const Dataset& dataset) {
    std::vector<double> out;
    out.reserve(dataset.size());
    const Eigen::Index chunk = 64;
    const Mat all = dataset_to_matrix(dataset);
    for (Eigen::Index start = 0; start < all.rows(); start += chunk) {
        const Eigen::Index m = std::min(chunk, all.rows() - start);
        const Mat probs = tst_forward(model, all.middleRows(start, m));
        for (Eigen::Index i = 0; i < m; ++i) out.push_back(probs(i, 1));
    }
    return out;
}

}  // namespace ergsyn
