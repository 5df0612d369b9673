#pragma once

#include <vector>

#include "ergsyn/nn/core.hpp"

namespace ergsyn::nn {

// Row-wise layer normalization with learned affine.
class LayerNorm {
public:
    Param gamma, beta;  // [1 x d]

    LayerNorm(const std::string& name, int dim);
    Mat forward(const Mat& x);
    Mat backward(const Mat& dy);
    ParamRefs params() { return {&gamma, &beta}; }

private:
    Mat x_hat_;
    Vec inv_std_;
    static constexpr double kEps = 1e-5;
};

// Multi-head self-attention over a batch of equal-length sequences stacked
// along the rows: x is [(batch*seq) x d], each consecutive block of `seq`
// rows is one example. Attention never crosses example boundaries.
class MultiHeadSelfAttention {
public:
    MultiHeadSelfAttention(const std::string& name, int dim, int heads, Rng& rng);

    Mat forward(const Mat& x, Eigen::Index batch, Eigen::Index seq);
    Mat backward(const Mat& dy);
    ParamRefs params();

private:
    int dim_, heads_, head_dim_;
    double scale_;
    Linear wq_, wk_, wv_, wo_;
    Eigen::Index batch_ = 0, seq_ = 0;
    Mat q_, k_, v_;
    std::vector<Mat> probs_;  // [batch * heads] score matrices, each [seq x seq]
};

// Pre-norm encoder block: x + Drop(Attn(LN(x))), then x + Drop(FFN(LN(x))).
class EncoderBlock {
public:
    EncoderBlock(const std::string& name, int dim, int heads, int ff, double dropout, Rng& rng);

    Mat forward(const Mat& x, Eigen::Index batch, Eigen::Index seq, bool train, Rng& rng);
    Mat backward(const Mat& dy);
    ParamRefs params();

private:
    LayerNorm ln1_, ln2_;
    MultiHeadSelfAttention attn_;
    Linear ff1_, ff2_;
    Relu act_;
    Dropout drop1_, drop2_;
};

// Fixed sine/cosine positional table, [seq x d].
Mat sinusoidal_encoding(int seq, int dim);

}  // namespace ergsyn::nn
