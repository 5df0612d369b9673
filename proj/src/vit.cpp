#include "ergsyn/vit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "ergsyn/checkpoint.hpp"
#include "ergsyn/errors.hpp"
#include "ergsyn/image.hpp"

namespace ergsyn {

using nn::Mat;
using nn::Vec;

nn::Mat patchify(const Scalogram& scalogram, int patch) {
    if (scalogram.channels.size() != 3) throw ConfigError("scalogram must have 3 channels");
    const auto side = scalogram.channels[0].rows();
    if (scalogram.channels[0].cols() != side)
        throw ConfigError("patchify expects a square scalogram");
    if (patch < 1 || side % patch != 0)
        throw ConfigError("patch side " + std::to_string(patch) + " must divide image side " +
                          std::to_string(side));

    const auto grid = side / patch;
    const auto n_tokens = grid * grid;
    const auto token_dim = 3 * patch * patch;
    Mat tokens(n_tokens, token_dim);
    for (Eigen::Index pr = 0; pr < grid; ++pr) {
        for (Eigen::Index pc = 0; pc < grid; ++pc) {
            const auto token = pr * grid + pc;
            Eigen::Index k = 0;
            for (int c = 0; c < 3; ++c)
                for (Eigen::Index r = 0; r < patch; ++r)
                    for (Eigen::Index col = 0; col < patch; ++col)
                        tokens(token, k++) = scalogram.channels[static_cast<std::size_t>(c)](
                            pr * patch + r, pc * patch + col);
        }
    }
    return tokens;
}

std::vector<Eigen::MatrixXd> unpatchify(const nn::Mat& tokens, int image, int patch) {
    const auto grid = image / patch;
    if (tokens.rows() != static_cast<Eigen::Index>(grid) * grid ||
        tokens.cols() != 3 * patch * patch)
        throw ConfigError("token matrix shape does not match image/patch sizes");

    std::vector<Eigen::MatrixXd> channels(3, Eigen::MatrixXd::Zero(image, image));
    for (Eigen::Index pr = 0; pr < grid; ++pr) {
        for (Eigen::Index pc = 0; pc < grid; ++pc) {
            const auto token = pr * grid + pc;
            Eigen::Index k = 0;
            for (int c = 0; c < 3; ++c)
                for (Eigen::Index r = 0; r < patch; ++r)
                    for (Eigen::Index col = 0; col < patch; ++col)
                        channels[static_cast<std::size_t>(c)](pr * patch + r, pc * patch + col) =
                            tokens(token, k++);
        }
    }
    return channels;
}

// ---------------------------------------------------------------------------
// Cache
// ---------------------------------------------------------------------------

ScalogramCache::ScalogramCache(std::filesystem::path dir, ScaleGrid grid, int image_side)
    : dir_(std::move(dir)), grid_(std::move(grid)), image_side_(image_side) {
    grid_.check();
    std::filesystem::create_directories(dir_);
}

Scalogram ScalogramCache::get(const ERGRecord& record) {
    std::uint64_t key = fnv1a64(record.samples.data(), record.samples.size() * sizeof(double));
    key = fnv1a64(grid_.scales.data(), grid_.scales.size() * sizeof(double), key);
    key = fnv1a64(&image_side_, sizeof(image_side_), key);
    std::ostringstream name;
    name << std::hex << key << ".npy";
    const auto path = dir_ / name.str();

    const auto side = static_cast<std::size_t>(image_side_);
    if (std::filesystem::exists(path)) {
        const auto [shape, data] = load_npy(path);
        if (shape.size() == 3 && shape[0] == 3 && shape[1] == side && shape[2] == side) {
            Scalogram s;
            s.grid = grid_;
            for (std::size_t c = 0; c < 3; ++c) {
                Eigen::MatrixXd m(image_side_, image_side_);
                for (std::size_t r = 0; r < side; ++r)
                    for (std::size_t col = 0; col < side; ++col)
                        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col)) =
                            data[(c * side + r) * side + col];
                s.channels.push_back(std::move(m));
            }
            return s;
        }
    }

    Scalogram s = build_scalogram(record.samples, grid_, image_side_);
    std::vector<double> data(3 * side * side);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t r = 0; r < side; ++r)
            for (std::size_t col = 0; col < side; ++col)
                data[(c * side + r) * side + col] = s.channels[c](
                    static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col));
    save_npy(path, {3, side, side}, data);
    return s;
}

nn::Mat ScalogramCache::tokens_for(const ERGRecord& record, int patch) {
    return patchify(get(record), patch);
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

namespace {

nlohmann::json config_to_json(const VitConfig& c) {
    return {{"image", c.image},   {"patch", c.patch},
            {"width", c.width},   {"heads", c.heads},
            {"layers", c.layers}, {"ff", c.ff},
            {"dropout", c.dropout}, {"batch", c.batch},
            {"lr", c.lr},         {"max_epochs", c.max_epochs},
            {"patience", c.patience},
            {"class_weight_control", c.class_weight_control},
            {"class_weight_asd", c.class_weight_asd},
            {"seed", c.seed}};
}

VitConfig config_from_json(const nlohmann::json& j) {
    VitConfig c;
    c.image = j.at("image");
    c.patch = j.at("patch");
    c.width = j.at("width");
    c.heads = j.at("heads");
    c.layers = j.at("layers");
    c.ff = j.at("ff");
    c.dropout = j.at("dropout");
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

VitModel::VitModel(const VitConfig& config, Rng& rng)
    : config_(config),
      embed_("vit.embed", 3 * config.patch * config.patch, config.width, rng),
      cls_("vit.cls", 1, config.width),
      pos_("vit.pos", config.tokens() + 1, config.width),
      final_ln_("vit.final_ln", config.width),
      head_("vit.head", config.width, 2, rng) {
    if (config.image % config.patch != 0)
        throw ConfigError("patch side must divide the image side");
    if (config.width % config.heads != 0)
        throw ConfigError("embedding width must be divisible by head count");
    for (Eigen::Index i = 0; i < cls_.value.size(); ++i)
        cls_.value.data()[i] = 0.02 * rng.gaussian();
    for (Eigen::Index i = 0; i < pos_.value.size(); ++i)
        pos_.value.data()[i] = 0.02 * rng.gaussian();
    blocks_.reserve(static_cast<std::size_t>(config.layers));
    for (int l = 0; l < config.layers; ++l)
        blocks_.emplace_back("vit.block" + std::to_string(l), config.width, config.heads,
                             config.ff, config.dropout, rng);
}

Mat VitModel::forward_logits(const std::vector<Mat>& token_batch, bool train, Rng& rng) {
    const auto n = static_cast<Eigen::Index>(token_batch.size());
    if (n == 0) throw DataError("empty batch");
    const auto n_tokens = static_cast<Eigen::Index>(config_.tokens());
    const auto seq = n_tokens + 1;
    batch_ = n;

    Mat stacked(n * n_tokens, token_batch[0].cols());
    for (Eigen::Index b = 0; b < n; ++b) {
        const Mat& tokens = token_batch[static_cast<std::size_t>(b)];
        if (tokens.rows() != n_tokens || tokens.cols() != 3 * config_.patch * config_.patch)
            throw DataError("token matrix shape does not match the model configuration");
        stacked.middleRows(b * n_tokens, n_tokens) = tokens;
    }
    const Mat embedded = embed_.forward(stacked);

    Mat x(n * seq, config_.width);
    for (Eigen::Index b = 0; b < n; ++b) {
        x.row(b * seq) = cls_.value.row(0);
        x.middleRows(b * seq + 1, n_tokens) = embedded.middleRows(b * n_tokens, n_tokens);
        x.middleRows(b * seq, seq) += pos_.value;
    }

    for (auto& block : blocks_) x = block.forward(x, n, seq, train, rng);
    x = final_ln_.forward(x);

    Mat cls_out(n, config_.width);
    for (Eigen::Index b = 0; b < n; ++b) cls_out.row(b) = x.row(b * seq);
    return head_.forward(cls_out);
}

void VitModel::backward(const Mat& dlogits) {
    const auto n = batch_;
    const auto n_tokens = static_cast<Eigen::Index>(config_.tokens());
    const auto seq = n_tokens + 1;

    const Mat d_cls_out = head_.backward(dlogits);
    Mat dx = Mat::Zero(n * seq, config_.width);
    for (Eigen::Index b = 0; b < n; ++b) dx.row(b * seq) = d_cls_out.row(b);

    dx = final_ln_.backward(dx);
    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) dx = it->backward(dx);

    Mat d_embedded(n * n_tokens, config_.width);
    for (Eigen::Index b = 0; b < n; ++b) {
        pos_.grad += dx.middleRows(b * seq, seq);
        cls_.grad.row(0) += dx.row(b * seq);
        d_embedded.middleRows(b * n_tokens, n_tokens) = dx.middleRows(b * seq + 1, n_tokens);
    }
    embed_.backward(d_embedded);
}

nn::ParamRefs VitModel::params() {
    nn::ParamRefs out = embed_.params();
    out.push_back(&cls_);
    out.push_back(&pos_);
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

void VitModel::save(const std::filesystem::path& path) const {
    CheckpointContainer c;
    c.payload_tag = "vit";
    c.config_json = config_to_json(config_).dump();
    for (const nn::Param* p : const_cast<VitModel*>(this)->params()) c.tensors[p->name] = p->value;
    c.save(path);
}

VitModel VitModel::load(const std::filesystem::path& path) {
    CheckpointContainer c = CheckpointContainer::load(path);
    if (c.payload_tag != "vit")
        throw DataError("checkpoint payload is '" + c.payload_tag + "', expected 'vit'");
    Rng init(0);
    VitModel model(config_from_json(nlohmann::json::parse(c.config_json)), init);
    for (nn::Param* p : model.params()) {
        const auto it = c.tensors.find(p->name);
        if (it == c.tensors.end()) throw DataError("checkpoint is missing tensor " + p->name);
        p->value = it->second;
    }
    return model;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

namespace {

std::vector<Mat> dataset_tokens(const Dataset& dataset, const VitConfig& config,
                                ScalogramCache& cache) {
    std::vector<Mat> tokens;
    tokens.reserve(dataset.size());
    for (const auto& rec : dataset.records) tokens.push_back(cache.tokens_for(rec, config.patch));
    return tokens;
}

Vec fold_class_weights(const VitConfig& config, const std::vector<int>& labels) {
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

double eval_loss(VitModel& model, const std::vector<Mat>& tokens, const std::vector<int>& labels,
                 const Vec& weights) {
    Rng rng(0);
    const Mat logits = model.forward_logits(tokens, false, rng);
    return nn::weighted_softmax_ce(logits, labels, weights);
}

}  // namespace

VitTrainResult vit_train(const std::vector<Fold>& folds, const VitConfig& config,
                         ScalogramCache& cache) {
    if (folds.empty()) throw ConfigError("vit_train needs at least one fold");

    VitTrainResult result;
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

        const auto train_tokens = dataset_tokens(fold.train, config, cache);
        const auto val_tokens = dataset_tokens(fold.val, config, cache);
        const Vec weights = fold_class_weights(config, train_labels);

        Rng init = Rng::derive(config.seed, "vit|init|" + std::to_string(f));
        VitModel model(config, init);
        nn::Adam opt;
        opt.lr = config.lr;

        Rng rng = Rng::derive(config.seed, "vit|train|" + std::to_string(f));
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
                const auto m = std::min<std::size_t>(static_cast<std::size_t>(config.batch),
                                                     order.size() - start);
                std::vector<Mat> xb(m);
                std::vector<int> yb(m);
                for (std::size_t i = 0; i < m; ++i) {
                    xb[i] = train_tokens[order[start + i]];
                    yb[i] = train_labels[order[start + i]];
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

            const double val_loss = eval_loss(model, val_tokens, val_labels, weights);
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

std::vector<double> vit_predict(VitModel& model, const Dataset& dataset, ScalogramCache& cache) {
    std::vector<double> out;
    out.reserve(dataset.size());
    Rng rng(0);
    const std::size_t chunk = 32;
    for (std::size_t start = 0; start < dataset.size(); start += chunk) {
        const std::size_t m = std::min(chunk, dataset.size() - start);
        std::vector<Mat> tokens(m);
        for (std::size_t i = 0; i < m; ++i)
            tokens[i] = cache.tokens_for(dataset.records[start + i], model.config().patch);
        const Mat probs = nn::softmax_rows(model.forward_logits(tokens, false, rng));
        for (std::size_t i = 0; i < m; ++i)
            out.push_back(probs(static_cast<Eigen::Index>(i), 1));
    }
    return out;
}

}  // namespace ergsyn
