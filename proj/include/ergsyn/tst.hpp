#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "ergsyn/dataset.hpp"
#include "ergsyn/nn/core.hpp"
#include "ergsyn/nn/transformer.hpp"
#include "ergsyn/types.hpp"

namespace ergsyn {

// Class index convention throughout the classifiers: 0 = Control, 1 = ASD.
inline int label_index(Label l) { return l == Label::ASD ? 1 : 0; }

struct TstConfig {
    int width = 64;
    int heads = 4;
    int layers = 3;
    int ff = 128;
    double dropout = 0.1;
    int seq_len = static_cast<int>(kSignalLength);

    enum class Positional { Sinusoidal, Learned, None };
    Positional positional = Positional::Sinusoidal;

    int batch = 32;
    double lr = 1e-4;
    int max_epochs = 300;
    int patience = 10;
    // <= 0 selects inverse class frequency of the training fold.
    double class_weight_control = 0.0;
    double class_weight_asd = 0.0;
    std::uint64_t seed = 0;
};

// Encoder-only transformer over raw waveforms: per-step scalar embedding,
// positional encoding, pre-norm encoder stack, mean-pool, linear head.
class TstModel {
public:
    TstModel(const TstConfig& config, Rng& rng);

    // signals is [n x seq_len] in microvolts; standardization is part of the
    // model (fitted on the training fold).
    nn::Mat forward_logits(const nn::Mat& signals, bool train, Rng& rng);
    void backward(const nn::Mat& dlogits);

    nn::ParamRefs params();
    const TstConfig& config() const { return config_; }

    double input_mean = 0.0;
    double input_std = 1.0;

    void save(const std::filesystem::path& path) const;
    static TstModel load(const std::filesystem::path& path);

private:
    TstConfig config_;
    nn::Linear embed_;
    std::optional<nn::Param> learned_pos_;
    nn::Mat sin_pos_;
    std::vector<nn::EncoderBlock> blocks_;
    nn::LayerNorm final_ln_;
    nn::Linear head_;
    Eigen::Index batch_ = 0;
};

// Row-normalized class probabilities, columns (Control, ASD).
nn::Mat tst_forward(TstModel& model, const nn::Mat& signals);

struct FoldHistory {
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    int best_epoch = 0;  // 1-based epoch of the validation-loss minimum
};

struct TstTrainResult {
    std::vector<TstModel> models;  // one per fold, restored to the best epoch
    std::vector<FoldHistory> histories;
};

TstTrainResult tst_train(const std::vector<Fold>& folds, const TstConfig& config);

// Per-record probability of ASD, in dataset order.
std::vector<double> tst_predict(TstModel& model, const Dataset& dataset);

nn::Mat dataset_to_matrix(const Dataset& dataset);
std::vector<int> dataset_labels(const Dataset& dataset);

}  // namespace ergsyn
