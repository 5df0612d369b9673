#include <doctest.h>

#include <cmath>
#include <functional>

#include "ergsyn/cgan.hpp"
#include "ergsyn/nn/core.hpp"
#include "ergsyn/nn/lstm.hpp"
#include "ergsyn/nn/transformer.hpp"
#include "ergsyn/rng.hpp"
#include "ergsyn/tst.hpp"

using namespace ergsyn;
using nn::Mat;
using nn::Vec;

namespace {

// Central-difference check of every parameter against the analytic gradient
// populated by one backward call. loss() must be a pure function of the
// current parameter values.
void check_gradients(const nn::ParamRefs& params, const std::function<double()>& loss,
                     const std::function<void()>& loss_with_backward, double tol = 1e-4) {
    nn::zero_grads(params);
    loss_with_backward();

    for (nn::Param* p : params) {
        Mat numeric(p->value.rows(), p->value.cols());
        for (Eigen::Index i = 0; i < p->value.size(); ++i) {
            const double saved = p->value.data()[i];
            const double h = 1e-5 * std::max(1.0, std::abs(saved));
            p->value.data()[i] = saved + h;
            const double up = loss();
            p->value.data()[i] = saved - h;
            const double down = loss();
            p->value.data()[i] = saved;
            numeric.data()[i] = (up - down) / (2.0 * h);
        }
        const double denom = std::max({p->grad.norm(), numeric.norm(), 1e-10});
        const double rel = (p->grad - numeric).norm() / denom;
        INFO("parameter ", p->name, " rel err ", rel);
        CHECK(rel < tol);
    }
}

std::vector<Eigen::RowVectorXd> tiny_conditions(int n) {
    std::vector<Eigen::RowVectorXd> conds;
    for (int i = 0; i < n; ++i) {
        const ConditionCode code{i % 2 == 0 ? Label::ASD : Label::Control,
                                 FlashStrength::from_index(i % FlashStrength::kCount)};
        conds.push_back(code.encode());
    }
    return conds;
}

}  // namespace

TEST_SUITE("nn-core") {
    TEST_CASE("softmax rows are normalized probabilities") {
        Rng rng(1);
        Mat logits(5, 2);
        for (Eigen::Index i = 0; i < logits.size(); ++i) logits.data()[i] = 3.0 * rng.gaussian();
        const Mat p = nn::softmax_rows(logits);
        for (Eigen::Index r = 0; r < p.rows(); ++r) {
            CHECK(p.row(r).sum() == doctest::Approx(1.0).epsilon(1e-9));
            for (Eigen::Index c = 0; c < p.cols(); ++c) {
                CHECK(p(r, c) > 0.0);
                CHECK(p(r, c) < 1.0);
            }
        }
    }

    TEST_CASE("zero-weight classes drop out of the weighted loss exactly") {
        Rng rng(2);
        Mat logits_small(3, 2);
        for (Eigen::Index i = 0; i < logits_small.size(); ++i)
            logits_small.data()[i] = rng.gaussian();
        const std::vector<int> labels_small = {0, 0, 0};

        // Same class-0 rows plus extra class-1 rows.
        Mat logits_big(5, 2);
        logits_big.topRows(3) = logits_small;
        logits_big(3, 0) = 0.3;
        logits_big(3, 1) = -1.0;
        logits_big(4, 0) = -2.0;
        logits_big(4, 1) = 0.9;
        const std::vector<int> labels_big = {0, 0, 0, 1, 1};

        Vec w(2);
        w << 1.7, 0.0;
        const double a = nn::weighted_softmax_ce(logits_small, labels_small, w);
        const double b = nn::weighted_softmax_ce(logits_big, labels_big, w);
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }

    TEST_CASE("linear+activation gradient matches finite differences") {
        Rng rng(3);
        nn::Linear lin("lin", 4, 3, rng);
        nn::LeakyRelu act(0.2);
        Mat x(5, 4);
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.gaussian();
        Vec targets(5);
        targets << 1, 0, 1, 0, 1;
        nn::Linear head("head", 3, 1, rng);

        auto forward = [&]() {
            const Vec logits = head.forward(act.forward(lin.forward(x))).col(0);
            return nn::bce_with_logits(logits, targets);
        };
        auto backward = [&]() {
            Vec dlogits;
            const Vec logits = head.forward(act.forward(lin.forward(x))).col(0);
            nn::bce_with_logits(logits, targets, &dlogits);
            lin.backward(act.backward(head.backward(dlogits)));
        };
        nn::ParamRefs params = lin.params();
        const auto hp = head.params();
        params.insert(params.end(), hp.begin(), hp.end());
        check_gradients(params, forward, backward);
    }

    TEST_CASE("adam bias correction moves parameters on the first step") {
        Rng rng(4);
        nn::Linear lin("lin", 2, 2, rng);
        const Mat before = lin.W.value;
        lin.W.grad.setOnes();
        lin.b.grad.setOnes();
        nn::Adam opt;
        opt.lr = 0.01;
        opt.step(lin.params());
        // First-step magnitude is lr regardless of the gradient scale.
        CHECK((lin.W.value - before).cwiseAbs().maxCoeff() == doctest::Approx(0.01).epsilon(1e-6));
    }
}

TEST_SUITE("nn-lstm") {
    TEST_CASE("bidirectional final-state gradient matches finite differences") {
        Rng rng(5);
        const int seq = 6, in = 3, hidden = 4, n = 2;
        nn::BiLstm rnn("rnn", in, hidden, rng);
        std::vector<Mat> xs(seq);
        for (auto& x : xs) {
            x.resize(n, in);
            for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.gaussian();
        }
        // Quadratic readout keeps the loss scalar and smooth.
        Mat readout(2 * hidden, 1);
        for (Eigen::Index i = 0; i < readout.size(); ++i) readout.data()[i] = rng.gaussian();

        auto forward = [&]() {
            const Mat h = rnn.forward_final(xs);
            return 0.5 * (h * readout).squaredNorm();
        };
        auto backward = [&]() {
            const Mat h = rnn.forward_final(xs);
            const Mat y = h * readout;
            rnn.backward_final(y * readout.transpose());
        };
        check_gradients(rnn.params(), forward, backward);
    }

    TEST_CASE("input gradients flow to every step") {
        Rng rng(6);
        const int seq = 5, in = 2, hidden = 3, n = 1;
        nn::BiLstm rnn("rnn", in, hidden, rng);
        std::vector<Mat> xs(seq);
        for (auto& x : xs) {
            x.resize(n, in);
            for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.gaussian();
        }
        const Mat h = rnn.forward_final(xs);
        const auto dxs = rnn.backward_final(Mat::Ones(n, 2 * hidden));
        REQUIRE(dxs.size() == static_cast<std::size_t>(seq));
        for (const auto& dx : dxs) CHECK(dx.cwiseAbs().maxCoeff() > 0.0);
    }
}

TEST_SUITE("nn-transformer") {
    TEST_CASE("encoder block gradient matches finite differences") {
        Rng rng(7);
        const int dim = 8, heads = 2, ff = 12;
        const Eigen::Index batch = 2, seq = 5;
        nn::EncoderBlock block("blk", dim, heads, ff, 0.0, rng);
        nn::Linear head("head", dim, 1, rng);
        Mat x(batch * seq, dim);
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.gaussian();
        Vec targets(batch * seq);
        for (Eigen::Index i = 0; i < targets.size(); ++i) targets[i] = i % 2;
        Rng fwd_rng(0);

        auto forward = [&]() {
            const Vec logits = head.forward(block.forward(x, batch, seq, false, fwd_rng)).col(0);
            return nn::bce_with_logits(logits, targets);
        };
        auto backward = [&]() {
            Vec dlogits;
            const Vec logits = head.forward(block.forward(x, batch, seq, false, fwd_rng)).col(0);
            nn::bce_with_logits(logits, targets, &dlogits);
            block.backward(head.backward(dlogits));
        };
        nn::ParamRefs params = block.params();
        const auto hp = head.params();
        params.insert(params.end(), hp.begin(), hp.end());
        check_gradients(params, forward, backward);
    }
}

TEST_SUITE("grad-check-tiny-models") {
    TEST_CASE("tiny TST: weighted cross-entropy gradients match finite differences") {
        TstConfig config;
        config.width = 8;
        config.heads = 2;
        config.layers = 1;
        config.ff = 16;
        config.dropout = 0.0;
        config.seq_len = 8;
        config.positional = TstConfig::Positional::Learned;
        Rng init(11);
        TstModel model(config, init);

        Rng rng(12);
        Mat signals(3, 8);
        for (Eigen::Index i = 0; i < signals.size(); ++i) signals.data()[i] = rng.gaussian();
        const std::vector<int> labels = {1, 0, 1};
        Vec weights(2);
        weights << 0.7, 1.3;
        Rng fwd_rng(0);

        auto forward = [&]() {
            const Mat logits = model.forward_logits(signals, false, fwd_rng);
            return nn::weighted_softmax_ce(logits, labels, weights);
        };
        auto backward = [&]() {
            const Mat logits = model.forward_logits(signals, false, fwd_rng);
            Mat dlogits;
            nn::weighted_softmax_ce(logits, labels, weights, &dlogits);
            model.backward(dlogits);
        };
        check_gradients(model.params(), forward, backward);
    }

    TEST_CASE("tiny CGAN: both adversarial losses match finite differences") {
        GanConfig config;
        config.hidden = 4;
        config.seq_len = 8;
        config.dropout = 0.0;
        Rng init(13);
        Generator gen(config, init);
        Discriminator dis(config, init);

        Rng rng(14);
        const int n = 4;
        Mat z(n, config.seq_len), real(n, config.seq_len);
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            z.data()[i] = rng.gaussian();
            real.data()[i] = rng.gaussian();
        }
        const auto conds = tiny_conditions(n);
        Rng fwd_rng(0);

        // Discriminator BCE on a fixed balanced batch.
        Mat both(2 * n, config.seq_len);
        both.topRows(n) = real;
        both.bottomRows(n) = z;
        auto conds2 = conds;
        conds2.insert(conds2.end(), conds.begin(), conds.end());
        Vec targets = Vec::Zero(2 * n);
        targets.head(n).setOnes();

        auto d_forward = [&]() {
            const Vec logits = dis.forward_logits(both, conds2, false, fwd_rng);
            return nn::bce_with_logits(logits, targets);
        };
        auto d_backward = [&]() {
            Vec dlogits;
            const Vec logits = dis.forward_logits(both, conds2, false, fwd_rng);
            nn::bce_with_logits(logits, targets, &dlogits);
            dis.backward(dlogits);
        };
        check_gradients(dis.params(), d_forward, d_backward);

        // Non-saturating generator BCE through the frozen discriminator.
        const Vec ones = Vec::Ones(n);
        auto g_forward = [&]() {
            const Mat fake = gen.forward(z, conds, false, fwd_rng);
            const Vec logits = dis.forward_logits(fake, conds, false, fwd_rng);
            return nn::bce_with_logits(logits, ones);
        };
        auto g_backward = [&]() {
            const Mat fake = gen.forward(z, conds, false, fwd_rng);
            const Vec logits = dis.forward_logits(fake, conds, false, fwd_rng);
            Vec dlogits;
            nn::bce_with_logits(logits, ones, &dlogits);
            gen.backward(dis.backward(dlogits));
        };
        check_gradients(gen.params(), g_forward, g_backward);
    }
}
