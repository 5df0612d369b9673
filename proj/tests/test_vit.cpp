#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "ergsyn/dataset.hpp"
#include "ergsyn/errors.hpp"
#include "ergsyn/vit.hpp"

using namespace ergsyn;
using nn::Mat;

namespace {

VitConfig small_config() {
    VitConfig c;
    c.image = 32;
    c.patch = 8;
    c.width = 16;
    c.heads = 2;
    c.layers = 1;
    c.ff = 32;
    c.dropout = 0.1;
    c.batch = 16;
    c.lr = 1e-3;
    c.max_epochs = 40;
    c.patience = 8;
    c.seed = 19;
    return c;
}

std::filesystem::path fresh_cache_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "ergsyn-tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

Scalogram tiny_scalogram(int side, double base) {
    Scalogram s;
    s.grid = ScaleGrid{{1.0}};
    for (int c = 0; c < 3; ++c) {
        Eigen::MatrixXd m(side, side);
        for (Eigen::Index r = 0; r < side; ++r)
            for (Eigen::Index col = 0; col < side; ++col)
                m(r, col) = base + c * side * side + r * side + col;
        s.channels.push_back(std::move(m));
    }
    return s;
}

}  // namespace

TEST_SUITE("patchify") {
    TEST_CASE("4x4 image with channel values 0..47 tiles into four 12-value tokens") {
        const Scalogram s = tiny_scalogram(4, 0.0);
        const Mat tokens = patchify(s, 2);
        REQUIRE(tokens.rows() == 4);
        REQUIRE(tokens.cols() == 12);
        // Token 0 is the top-left 2x2 block of each channel in order.
        const double expected[12] = {0, 1, 4, 5, 16, 17, 20, 21, 32, 33, 36, 37};
        for (int k = 0; k < 12; ++k) CHECK(tokens(0, k) == expected[k]);
        // Token 3 is the bottom-right block.
        const double expected3[12] = {10, 11, 14, 15, 26, 27, 30, 31, 42, 43, 46, 47};
        for (int k = 0; k < 12; ++k) CHECK(tokens(3, k) == expected3[k]);
    }

    TEST_CASE("patch side equal to the image side gives a single flattened token") {
        const Scalogram s = tiny_scalogram(4, 2.0);
        const Mat tokens = patchify(s, 4);
        CHECK(tokens.rows() == 1);
        CHECK(tokens.cols() == 48);
    }

    TEST_CASE("patchify then unpatchify is the identity on random images") {
        Rng rng(3);
        Scalogram s;
        s.grid = ScaleGrid{{1.0}};
        for (int c = 0; c < 3; ++c) {
            Eigen::MatrixXd m(8, 8);
            for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.gaussian();
            s.channels.push_back(std::move(m));
        }
        const Mat tokens = patchify(s, 2);
        const auto channels = unpatchify(tokens, 8, 2);
        for (int c = 0; c < 3; ++c)
            CHECK((channels[static_cast<std::size_t>(c)] -
                   s.channels[static_cast<std::size_t>(c)]).cwiseAbs().maxCoeff() == 0.0);
    }

    TEST_CASE("indivisible patch size is a config error") {
        const Scalogram s = tiny_scalogram(4, 0.0);
        CHECK_THROWS_AS(patchify(s, 3), ConfigError);
    }
}

TEST_SUITE("vit") {
    TEST_CASE("forward outputs are row-normalized probabilities") {
        Rng init(4);
        VitModel model(small_config(), init);
        Rng rng(5);
        std::vector<Mat> batch;
        for (int i = 0; i < 3; ++i) {
            Mat t(small_config().tokens(), 3 * 8 * 8);
            for (Eigen::Index k = 0; k < t.size(); ++k) t.data()[k] = rng.uniform();
            batch.push_back(std::move(t));
        }
        Rng fwd(0);
        const Mat probs = nn::softmax_rows(model.forward_logits(batch, false, fwd));
        for (Eigen::Index r = 0; r < probs.rows(); ++r)
            CHECK(probs.row(r).sum() == doctest::Approx(1.0).epsilon(1e-6));
    }

    TEST_CASE("uniform attention plus zero positional embeddings is patch-permutation invariant") {
        VitConfig c = small_config();
        c.dropout = 0.0;
        Rng init(6);
        VitModel model(c, init);
        // Zero queries/keys make every attention row uniform; zero positional
        // embeddings remove order information.
        for (nn::Param* p : model.params()) {
            if (p->name.find(".wq.") != std::string::npos ||
                p->name.find(".wk.") != std::string::npos)
                p->value.setZero();
        }
        model.positional().value.setZero();

        Rng rng(7);
        Mat tokens(c.tokens(), 3 * c.patch * c.patch);
        for (Eigen::Index k = 0; k < tokens.size(); ++k) tokens.data()[k] = rng.gaussian();
        Mat permuted(tokens.rows(), tokens.cols());
        Rng perm_rng(8);
        std::vector<Eigen::Index> perm(static_cast<std::size_t>(tokens.rows()));
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<Eigen::Index>(i);
        perm_rng.shuffle(perm);
        for (std::size_t i = 0; i < perm.size(); ++i)
            permuted.row(static_cast<Eigen::Index>(i)) = tokens.row(perm[i]);

        Rng fwd(0);
        const Mat a = model.forward_logits({tokens}, false, fwd);
        const Mat b = model.forward_logits({permuted}, false, fwd);
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9);
    }

    TEST_CASE("cold and warm scalogram caches give identical predictions") {
        const auto dir = fresh_cache_dir("vit-cache");
        OracleParams p;
        p.noise_std = 2.0;
        const Dataset d = simulate_oracle_cells(p, {FlashStrength::from_index(0)}, 4, 23);

        const VitConfig c = small_config();
        ScalogramCache cache_cold(dir, ScaleGrid::geometric(1.0, 32.0, 16), c.image);
        Rng init(9);
        VitModel model(c, init);
        const auto cold = vit_predict(model, d, cache_cold);

        ScalogramCache cache_warm(dir, ScaleGrid::geometric(1.0, 32.0, 16), c.image);
        const auto warm = vit_predict(model, d, cache_warm);
        REQUIRE(cold.size() == warm.size());
        for (std::size_t i = 0; i < cold.size(); ++i) CHECK(cold[i] == warm[i]);
        CHECK(!std::filesystem::is_empty(dir));
    }

    TEST_CASE("training separates the oracle classes on scalograms") {
        const auto dir = fresh_cache_dir("vit-train");
        OracleParams p;
        p.noise_std = 2.0;
        const Dataset d = simulate_oracle_cells(p, {FlashStrength::from_index(0)}, 30, 29);
        SplitPlan plan;
        plan.folds = 2;
        plan.seed = 31;
        const Split sp = split(d, plan);

        const VitConfig c = small_config();
        ScalogramCache cache(dir, ScaleGrid::geometric(1.0, 32.0, 16), c.image);
        const VitTrainResult r = vit_train(sp.folds, c, cache);
        REQUIRE(r.models.size() == 2);

        auto& model = const_cast<VitModel&>(r.models[0]);
        const auto probs = vit_predict(model, sp.test, cache);
        const auto labels = dataset_labels(sp.test);
        double correct = 0;
        for (std::size_t i = 0; i < probs.size(); ++i)
            correct += (probs[i] > 0.5) == (labels[i] == 1) ? 1.0 : 0.0;
        CHECK(correct / static_cast<double>(probs.size()) >= 0.75);
    }

    TEST_CASE("checkpoint round-trips through disk") {
        Rng init(10);
        VitModel model(small_config(), init);
        const auto dir = std::filesystem::temp_directory_path() / "ergsyn-tests";
        std::filesystem::create_directories(dir);
        const auto path = dir / "vit-roundtrip.ckpt";
        model.save(path);
        VitModel back = VitModel::load(path);

        Rng rng(11);
        Mat tokens(small_config().tokens(), 3 * 8 * 8);
        for (Eigen::Index k = 0; k < tokens.size(); ++k) tokens.data()[k] = rng.uniform();
        Rng fwd(0);
        const Mat a = model.forward_logits({tokens}, false, fwd);
        const Mat b = back.forward_logits({tokens}, false, fwd);
        CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    }
}
