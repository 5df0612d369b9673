#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ergsyn/dataset.hpp"
#include "ergsyn/errors.hpp"
#include "ergsyn/tst.hpp"

using namespace ergsyn;
using nn::Mat;

namespace {

TstConfig small_config() {
    TstConfig c;
    c.width = 16;
    c.heads = 2;
    c.layers = 1;
    c.ff = 32;
    c.dropout = 0.1;
    c.batch = 16;
    c.lr = 1e-3;
    c.max_epochs = 40;
    c.patience = 8;
    c.seed = 3;
    return c;
}

Dataset easy_oracle(int n_per_cell, std::uint64_t seed = 11) {
    OracleParams p;
    p.noise_std = 2.0;
    return simulate_oracle_cells(p, {FlashStrength::from_index(0)}, n_per_cell, seed);
}

}  // namespace

TEST_SUITE("tst") {
    TEST_CASE("forward rows are probabilities summing to one") {
        Rng init(1);
        TstModel model(small_config(), init);
        Rng rng(2);
        Mat signals(5, kSignalLength);
        for (Eigen::Index i = 0; i < signals.size(); ++i) signals.data()[i] = 40.0 * rng.gaussian();
        const Mat probs = tst_forward(model, signals);
        for (Eigen::Index r = 0; r < probs.rows(); ++r) {
            CHECK(probs.row(r).sum() == doctest::Approx(1.0).epsilon(1e-6));
            for (Eigen::Index c = 0; c < 2; ++c) {
                CHECK(probs(r, c) > 0.0);
                CHECK(probs(r, c) < 1.0);
            }
        }
    }

    TEST_CASE("duplicated rows produce identical outputs and batch order only permutes them") {
        Rng init(4);
        TstModel model(small_config(), init);
        Rng rng(5);
        Mat signals(4, kSignalLength);
        for (Eigen::Index i = 0; i < signals.size(); ++i) signals.data()[i] = rng.gaussian();
        signals.row(3) = signals.row(0);

        const Mat probs = tst_forward(model, signals);
        CHECK((probs.row(3) - probs.row(0)).cwiseAbs().maxCoeff() < 1e-12);

        Mat shuffled(4, kSignalLength);
        const int perm[4] = {2, 0, 3, 1};
        for (int i = 0; i < 4; ++i) shuffled.row(i) = signals.row(perm[i]);
        const Mat probs_shuffled = tst_forward(model, shuffled);
        for (int i = 0; i < 4; ++i)
            CHECK((probs_shuffled.row(i) - probs.row(perm[i])).cwiseAbs().maxCoeff() < 1e-9);
    }

    TEST_CASE("length mismatch is a shape error") {
        Rng init(6);
        TstModel model(small_config(), init);
        Rng dummy(0);
        CHECK_THROWS_AS(model.forward_logits(Mat::Zero(2, 100), false, dummy), DataError);
    }

    TEST_CASE("without positional encodings time reversal leaves logits unchanged") {
        TstConfig c = small_config();
        c.positional = TstConfig::Positional::None;
        c.dropout = 0.0;
        Rng init(7);
        TstModel model(c, init);
        Rng rng(8);
        Mat signal(1, kSignalLength);
        for (Eigen::Index i = 0; i < signal.size(); ++i) signal.data()[i] = rng.gaussian();
        Mat reversed(1, kSignalLength);
        for (Eigen::Index t = 0; t < signal.cols(); ++t)
            reversed(0, t) = signal(0, signal.cols() - 1 - t);

        Rng fwd(0);
        const Mat a = model.forward_logits(signal, false, fwd);
        const Mat b = model.forward_logits(reversed, false, fwd);
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-5);

        // With sinusoidal encodings the same pair separates.
        TstConfig c2 = small_config();
        c2.dropout = 0.0;
        Rng init2(7);
        TstModel model2(c2, init2);
        const Mat a2 = model2.forward_logits(signal, false, fwd);
        const Mat b2 = model2.forward_logits(reversed, false, fwd);
        CHECK((a2 - b2).cwiseAbs().maxCoeff() > 1e-7);
    }

    TEST_CASE("single-class training folds are invalid") {
        Dataset d = easy_oracle(12);
        Dataset asd_only;
        for (const auto& r : d.records)
            if (r.label == Label::ASD) asd_only.records.push_back(r);
        std::vector<Fold> folds(1);
        folds[0].train = asd_only;
        folds[0].val = d;
        CHECK_THROWS_WITH_AS(tst_train(folds, small_config()), doctest::Contains("single class"),
                             ConfigError);
    }

    TEST_CASE("training separates the oracle classes and early stopping respects patience") {
        const Dataset d = easy_oracle(40);
        SplitPlan plan;
        plan.folds = 2;
        plan.seed = 9;
        const Split sp = split(d, plan);
        const TstTrainResult r = tst_train(sp.folds, small_config());

        REQUIRE(r.models.size() == 2);
        for (const auto& h : r.histories) {
            CHECK(static_cast<int>(h.val_loss.size()) - h.best_epoch <= small_config().patience);
            CHECK(h.best_epoch >= 1);
        }

        // Balanced accuracy on the held-out quarter.
        auto& model = const_cast<TstModel&>(r.models[0]);
        const std::vector<double> p = tst_predict(model, sp.test);
        const auto labels = dataset_labels(sp.test);
        double tp = 0, tn = 0, np = 0, nn_ = 0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (labels[i] == 1) {
                np += 1;
                tp += p[i] > 0.5 ? 1 : 0;
            } else {
                nn_ += 1;
                tn += p[i] <= 0.5 ? 1 : 0;
            }
        }
        const double ba = 0.5 * (tp / np + tn / nn_);
        CHECK(ba >= 0.8);
    }

    TEST_CASE("prediction is order-invariant, empty-safe, and probabilities are open-interval") {
        const Dataset d = easy_oracle(6);
        Rng init(10);
        TstModel model(small_config(), init);

        CHECK(tst_predict(model, Dataset{}).empty());

        Dataset one;
        one.records.push_back(d.records[0]);
        const auto single = tst_predict(model, one);
        REQUIRE(single.size() == 1);
        CHECK(single[0] > 0.0);
        CHECK(single[0] < 1.0);

        const auto straight = tst_predict(model, d);
        Dataset reversed = d;
        std::reverse(reversed.records.begin(), reversed.records.end());
        const auto back = tst_predict(model, reversed);
        for (std::size_t i = 0; i < straight.size(); ++i)
            CHECK(back[straight.size() - 1 - i] == doctest::Approx(straight[i]).epsilon(1e-12));
    }

    TEST_CASE("model checkpoint round-trips through disk") {
        Rng init(12);
        TstModel model(small_config(), init);
        model.input_mean = 3.25;
        model.input_std = 17.5;
        const auto dir = std::filesystem::temp_directory_path() / "ergsyn-tests";
        std::filesystem::create_directories(dir);
        const auto path = dir / "tst-roundtrip.ckpt";
        model.save(path);
        TstModel back = TstModel::load(path);
        CHECK(back.input_mean == model.input_mean);
        CHECK(back.input_std == model.input_std);

        Rng rng(13);
        Mat signals(3, kSignalLength);
        for (Eigen::Index i = 0; i < signals.size(); ++i) signals.data()[i] = rng.gaussian();
        const Mat a = tst_forward(model, signals);
        const Mat b = tst_forward(back, signals);
        CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    }
}
