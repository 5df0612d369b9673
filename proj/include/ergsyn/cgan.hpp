#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ergsyn/dataset.hpp"
#include "ergsyn/nn/core.hpp"
#include "ergsyn/nn/lstm.hpp"
#include "ergsyn/types.hpp"

namespace ergsyn {

// Auxiliary conditioning vector: one-hot class (2) + one-hot strength (9).
struct ConditionCode {
    Label label = Label::Control;
    FlashStrength strength;

    static constexpr int kDim = 11;
    Eigen::RowVectorXd encode() const;
};

// Per-step latent noise, one draw per output sample.
struct LatentSeed {
    std::vector<double> z;
    std::uint64_t rng_seed = 0;

    static LatentSeed from_seed(std::uint64_t seed, int seq_len = static_cast<int>(kSignalLength));
};

// hidden = 512 reproduces the published layer sizes: the concatenated
// bidirectional final states give 1024, the generator FC stack is
// 1024->1024 (x2) then 1024->235, the discriminator 1024->1024, 1024->512,
// 512->1 with a terminal sigmoid.
struct GanConfig {
    int hidden = 512;
    int seq_len = static_cast<int>(kSignalLength);
    double dropout = 0.2;
    double leaky_slope = 0.2;
    int epochs = 10000;
    int batch = 15;
    double lr = 2e-4;
    double adam_beta1 = 0.5;
    double adam_beta2 = 0.999;
    int checkpoint_every = 500;
    double holdback_fraction = 0.1;
    std::uint64_t seed = 0;
};

// Training-space inverse mapping, averaged per (label, strength) cell.
struct CellNorm {
    double lo = -1.0;
    double hi = 1.0;
};

struct TrainingCurves {
    std::vector<double> g_loss, d_loss, d_acc_real, d_acc_fake;
};

struct GanCheckpoint {
    GanConfig config;
    std::map<std::string, nn::Mat> tensors;  // model parameters + optimizer state
    int epoch = 0;
    TrainingCurves curves;
    std::string rng_state;
    std::map<CellKey, CellNorm> cell_norms;
    std::vector<std::uint64_t> training_manifest;  // sorted record hashes

    void save(const std::filesystem::path& path) const;
    static GanCheckpoint load(const std::filesystem::path& path);
};

class TrainingDivergedError : public std::runtime_error {
public:
    TrainingDivergedError(int epoch, std::shared_ptr<GanCheckpoint> last)
        : std::runtime_error("training diverged (non-finite loss) at epoch " +
                             std::to_string(epoch)),
          epoch(epoch),
          last_checkpoint(std::move(last)) {}

    int epoch;
    std::shared_ptr<GanCheckpoint> last_checkpoint;
};

// Recurrent front end over [z_t | condition], final states through the FC
// stack to a full-length waveform in training space.
class Generator {
public:
    Generator(const GanConfig& config, Rng& rng);

    // conditions: one row vector per batch item; z: [n x seq] noise.
    nn::Mat forward(const nn::Mat& z, const std::vector<Eigen::RowVectorXd>& conds, bool train,
                    Rng& rng);
    void backward(const nn::Mat& dy);
    nn::ParamRefs params();

private:
    GanConfig config_;
    nn::BiLstm rnn_;
    nn::Linear fc1_, fc2_, out_;
    nn::LeakyRelu act1_, act2_;
    nn::Dropout drop1_, drop2_;
    std::vector<nn::Mat> xs_;
};

class Discriminator {
public:
    Discriminator(const GanConfig& config, Rng& rng);

    // signals: [n x seq] in training space; returns pre-sigmoid logits.
    nn::Vec forward_logits(const nn::Mat& signals, const std::vector<Eigen::RowVectorXd>& conds,
                           bool train, Rng& rng);
    // Returns gradient w.r.t. the input signals (used for generator updates).
    nn::Mat backward(const nn::Vec& dlogits);
    nn::ParamRefs params();

private:
    GanConfig config_;
    nn::BiLstm rnn_;
    nn::Linear fc1_, fc2_, out_;
    nn::LeakyRelu act1_, act2_;
    nn::Dropout drop1_, drop2_;
    std::vector<nn::Mat> xs_;
};

// Live models reconstructed from a checkpoint for inference.
class GanSession {
public:
    explicit GanSession(const GanCheckpoint& checkpoint);

    // Deterministic in (checkpoint, condition, seed); output in microvolts.
    ERGRecord generate(const ConditionCode& condition, const LatentSeed& seed);
    double discriminate(std::span<const double> signal, const ConditionCode& condition);
    nn::Vec discriminate_batch(const nn::Mat& signals,
                               const std::vector<ConditionCode>& conditions);

    const GanCheckpoint& checkpoint() const { return *checkpoint_; }

private:
    const GanCheckpoint* checkpoint_;
    Generator generator_;
    Discriminator discriminator_;
    Rng null_rng_{0};
};

using CheckpointHook = std::function<void(const GanCheckpoint&, bool is_best)>;

// Alternating one discriminator and one generator step per batch with the
// non-saturating generator objective. Returns the final-epoch checkpoint;
// the hook fires every checkpoint_every epochs and at the end.
GanCheckpoint train_gan(const Dataset& train, const GanConfig& config,
                        const CheckpointHook& hook = {});

// Fraction of real/fake decisions the discriminator gets right on a balanced
// probe built from `records` plus freshly generated counterparts.
double gan_real_fake_accuracy(GanSession& session, const std::vector<ERGRecord>& records,
                              std::uint64_t seed);

struct FidelityReport {
    std::map<CellKey, double> per_cell;
    double overall = 0.0;
};

class TstModel;  // classifier probe

// Fraction of generated signals whose probe-predicted label matches the
// requested condition, per condition cell.
FidelityReport condition_fidelity(const GanCheckpoint& checkpoint, TstModel& probe, int n,
                                  std::uint64_t seed);

}  // namespace ergsyn
