#include "ergsyn/nn/transformer.hpp"

#include <cmath>

#include "ergsyn/errors.hpp"

namespace ergsyn::nn {

LayerNorm::LayerNorm(const std::string& name, int dim)
    : gamma(name + ".gamma", 1, dim), beta(name + ".beta", 1, dim) {
    gamma.value.setOnes();
    beta.value.setZero();
}

Mat LayerNorm::forward(const Mat& x) {
    const auto n = x.rows();
    const auto d = x.cols();
    x_hat_.resize(n, d);
    inv_std_.resize(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const double mean = x.row(r).mean();
        const double var = (x.row(r).array() - mean).square().mean();
        inv_std_[r] = 1.0 / std::sqrt(var + kEps);
        x_hat_.row(r) = (x.row(r).array() - mean) * inv_std_[r];
    }
    return (x_hat_.array().rowwise() * gamma.value.row(0).array()).rowwise() +
           beta.value.row(0).array();
}

Mat LayerNorm::backward(const Mat& dy) {
    const auto n = dy.rows();
    const auto d = dy.cols();
    gamma.grad.row(0) += dy.cwiseProduct(x_hat_).colwise().sum();
    beta.grad.row(0) += dy.colwise().sum();

    Mat dx(n, d);
    for (Eigen::Index r = 0; r < n; ++r) {
        const Eigen::RowVectorXd g = dy.row(r).cwiseProduct(gamma.value.row(0));
        const double mean_g = g.mean();
        const double mean_gx = g.cwiseProduct(x_hat_.row(r)).mean();
        dx.row(r) =
            inv_std_[r] * (g.array() - mean_g - x_hat_.row(r).array() * mean_gx).matrix();
    }
    return dx;
}

MultiHeadSelfAttention::MultiHeadSelfAttention(const std::string& name, int dim, int heads,
                                               Rng& rng)
    : dim_(dim),
      heads_(heads),
      head_dim_(dim / heads),
      scale_(1.0 / std::sqrt(static_cast<double>(dim / heads))),
      wq_(name + ".wq", dim, dim, rng),
      wk_(name + ".wk", dim, dim, rng),
      wv_(name + ".wv", dim, dim, rng),
      wo_(name + ".wo", dim, dim, rng) {
    if (dim % heads != 0) throw ConfigError("embedding width must be divisible by head count");
}

Mat MultiHeadSelfAttention::forward(const Mat& x, Eigen::Index batch, Eigen::Index seq) {
    if (x.rows() != batch * seq) throw ConfigError("attention batch/seq shape mismatch");
    batch_ = batch;
    seq_ = seq;
    q_ = wq_.forward(x);
    k_ = wk_.forward(x);
    v_ = wv_.forward(x);

    probs_.assign(static_cast<std::size_t>(batch * heads_), Mat());
    Mat context(x.rows(), dim_);
    for (Eigen::Index bidx = 0; bidx < batch; ++bidx) {
        const auto row0 = bidx * seq;
        for (int h = 0; h < heads_; ++h) {
            const auto col0 = static_cast<Eigen::Index>(h) * head_dim_;
            const auto qh = q_.block(row0, col0, seq, head_dim_);
            const auto kh = k_.block(row0, col0, seq, head_dim_);
            const auto vh = v_.block(row0, col0, seq, head_dim_);
            Mat scores = scale_ * (qh * kh.transpose());
            Mat p = softmax_rows(scores);
            context.block(row0, col0, seq, head_dim_).noalias() = p * vh;
            probs_[static_cast<std::size_t>(bidx * heads_ + h)] = std::move(p);
        }
    }
    return wo_.forward(context);
}

Mat MultiHeadSelfAttention::backward(const Mat& dy) {
    const Mat dcontext = wo_.backward(dy);
    Mat dq = Mat::Zero(dy.rows(), dim_);
    Mat dk = Mat::Zero(dy.rows(), dim_);
    Mat dv = Mat::Zero(dy.rows(), dim_);

    for (Eigen::Index bidx = 0; bidx < batch_; ++bidx) {
        const auto row0 = bidx * seq_;
        for (int h = 0; h < heads_; ++h) {
            const auto col0 = static_cast<Eigen::Index>(h) * head_dim_;
            const Mat& p = probs_[static_cast<std::size_t>(bidx * heads_ + h)];
            const auto qh = q_.block(row0, col0, seq_, head_dim_);
            const auto kh = k_.block(row0, col0, seq_, head_dim_);
            const auto vh = v_.block(row0, col0, seq_, head_dim_);
            const auto dctx = dcontext.block(row0, col0, seq_, head_dim_);

            const Mat dp = dctx * vh.transpose();
            dv.block(row0, col0, seq_, head_dim_).noalias() = p.transpose() * dctx;

            Mat ds(seq_, seq_);
            for (Eigen::Index r = 0; r < seq_; ++r) {
                const double dot = dp.row(r).dot(p.row(r));
                ds.row(r) = p.row(r).cwiseProduct((dp.row(r).array() - dot).matrix());
            }
            dq.block(row0, col0, seq_, head_dim_).noalias() = scale_ * (ds * kh);
            dk.block(row0, col0, seq_, head_dim_).noalias() = scale_ * (ds.transpose() * qh);
        }
    }
    return wq_.backward(dq) + wk_.backward(dk) + wv_.backward(dv);
}

ParamRefs MultiHeadSelfAttention::params() {
    ParamRefs out;
    for (Linear* l : {&wq_, &wk_, &wv_, &wo_}) {
        const ParamRefs p = l->params();
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

EncoderBlock::EncoderBlock(const std::string& name, int dim, int heads, int ff, double dropout,
                           Rng& rng)
    : ln1_(name + ".ln1", dim),
      ln2_(name + ".ln2", dim),
      attn_(name + ".attn", dim, heads, rng),
      ff1_(name + ".ff1", dim, ff, rng),
      ff2_(name + ".ff2", ff, dim, rng),
      drop1_(dropout),
      drop2_(dropout) {}

Mat EncoderBlock::forward(const Mat& x, Eigen::Index batch, Eigen::Index seq, bool train,
                          Rng& rng) {
    Mat h = x + drop1_.forward(attn_.forward(ln1_.forward(x), batch, seq), train, rng);
    return h + drop2_.forward(ff2_.forward(act_.forward(ff1_.forward(ln2_.forward(h)))), train,
                              rng);
}

Mat EncoderBlock::backward(const Mat& dy) {
    const Mat d_ffn = drop2_.backward(dy);
    const Mat dh = dy + ln2_.backward(ff1_.backward(act_.backward(ff2_.backward(d_ffn))));
    const Mat d_attn = drop1_.backward(dh);
    return dh + ln1_.backward(attn_.backward(d_attn));
}

ParamRefs EncoderBlock::params() {
    ParamRefs out;
    auto append = [&out](ParamRefs p) { out.insert(out.end(), p.begin(), p.end()); };
    append(ln1_.params());
    append(attn_.params());
    append(ln2_.params());
    append(ff1_.params());
    append(ff2_.params());
    return out;
}

Mat sinusoidal_encoding(int seq, int dim) {
    Mat pe(seq, dim);
    for (int t = 0; t < seq; ++t) {
        for (int i = 0; i < dim; i += 2) {
            const double rate = std::pow(10000.0, -static_cast<double>(i) / dim);
            pe(t, i) = std::sin(t * rate);
            if (i + 1 < dim) pe(t, i + 1) = std::cos(t * rate);
        }
    }
    return pe;
}

}  // namespace ergsyn::nn
