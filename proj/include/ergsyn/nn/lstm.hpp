#pragma once

#include <vector>

#include "ergsyn/nn/core.hpp"

namespace ergsyn::nn {

// One recurrent direction with gated memory cells. Only the final hidden
// state is exposed; the backward pass still runs through every step. The
// caller's per-step input matrices must stay alive until backward_final.
class LstmCell {
public:
    Param Wx, Wh, b;  // [in x 4h], [h x 4h], [1 x 4h]; gate blocks i|f|g|o

    LstmCell(const std::string& name, int input, int hidden, Rng& rng);

    // xs[t] is [n x in]; processes in reverse order when reversed is set.
    Mat forward_final(const std::vector<Mat>& xs, bool reversed);
    // dh_final is [n x h]; returns input gradients aligned with xs.
    std::vector<Mat> backward_final(const Mat& dh_final);

    ParamRefs params() { return {&Wx, &Wh, &b}; }
    int hidden() const { return hidden_; }

private:
    int input_, hidden_;
    bool reversed_ = false;
    const std::vector<Mat>* xs_ = nullptr;
    std::vector<Mat> ifgo_, cs_, hs_, tanh_cs_;  // per processing step
};

// Both directions over the same input sequence; output is the concatenation
// of the two final states, [n x 2h].
class BiLstm {
public:
    BiLstm(const std::string& name, int input, int hidden, Rng& rng);

    Mat forward_final(const std::vector<Mat>& xs);
    std::vector<Mat> backward_final(const Mat& d_concat);

    ParamRefs params();
    int hidden() const { return fwd_.hidden(); }

private:
    LstmCell fwd_, bwd_;
};

}  // namespace ergsyn::nn
