#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ergsyn/dataset.hpp"
#include "ergsyn/nn/core.hpp"
#include "ergsyn/nn/transformer.hpp"
#include "ergsyn/tst.hpp"
#include "ergsyn/wavelet.hpp"

namespace ergsyn {

struct VitConfig {
    int image = 64;  // resized scalogram side S
    int patch = 8;   // patch side P; must divide S
    int width = 64;
    int heads = 4;
    int layers = 3;
    int ff = 128;
    double dropout = 0.1;

    int batch = 32;
    double lr = 1e-4;
    int max_epochs = 300;
    int patience = 10;
    double class_weight_control = 0.0;
    double class_weight_asd = 0.0;
    std::uint64_t seed = 0;

    int tokens() const { return (image / patch) * (image / patch); }
};

// Flattens an S x S x 3 scalogram into (S/P)^2 tokens of 3*P^2 values, tiled
// row-major over the patch grid; values inside a token are ordered (channel,
// row, column). Throws ConfigError when P does not divide S.
nn::Mat patchify(const Scalogram& scalogram, int patch);

// Exact inverse of patchify (bitwise).
std::vector<Eigen::MatrixXd> unpatchify(const nn::Mat& tokens, int image, int patch);

// Disk cache of resized scalograms keyed by (record content, scale grid,
// image side). Concurrent readers are fine; at most one writer per record.
class ScalogramCache {
public:
    ScalogramCache(std::filesystem::path dir, ScaleGrid grid, int image_side);

    Scalogram get(const ERGRecord& record);
    nn::Mat tokens_for(const ERGRecord& record, int patch);
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    ScaleGrid grid_;
    int image_side_;
};

// Patch-embedding transformer with a prepended classification token and
// learned positional embeddings; the head reads the classification token.
class VitModel {
public:
    VitModel(const VitConfig& config, Rng& rng);

    // token_batch: one [(S/P)^2 x 3P^2] matrix per example.
    nn::Mat forward_logits(const std::vector<nn::Mat>& token_batch, bool train, Rng& rng);
    void backward(const nn::Mat& dlogits);

    nn::ParamRefs params();
    const VitConfig& config() const { return config_; }

    void save(const std::filesystem::path& path) const;
    static VitModel load(const std::filesystem::path& path);

    // Test hooks for architectural sanity checks.
    nn::Param& positional() { return pos_; }

private:
    VitConfig config_;
    nn::Linear embed_;
    nn::Param cls_;
    nn::Param pos_;
    std::vector<nn::EncoderBlock> blocks_;
    nn::LayerNorm final_ln_;
    nn::Linear head_;
    Eigen::Index batch_ = 0;
};

struct VitTrainResult {
    std::vector<VitModel> models;
    std::vector<FoldHistory> histories;
};

VitTrainResult vit_train(const std::vector<Fold>& folds, const VitConfig& config,
                         ScalogramCache& cache);

std::vector<double> vit_predict(VitModel& model, const Dataset& dataset, ScalogramCache& cache);

}  // namespace ergsyn
