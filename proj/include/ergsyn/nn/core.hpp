#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "ergsyn/rng.hpp"

namespace ergsyn::nn {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// A named trainable tensor with its gradient accumulator.
struct Param {
    std::string name;
    Mat value;
    Mat grad;

    Param(std::string n, Eigen::Index rows, Eigen::Index cols)
        : name(std::move(n)), value(Mat::Zero(rows, cols)), grad(Mat::Zero(rows, cols)) {}
};

using ParamRefs = std::vector<Param*>;

void zero_grads(const ParamRefs& params);
void sgd_step(const ParamRefs& params, double lr);
std::vector<Mat> snapshot(const ParamRefs& params);
void restore(const ParamRefs& params, const std::vector<Mat>& values);

// First-order adaptive optimizer with bias correction. Slot order follows the
// ParamRefs order, which is fixed by model construction order.
class Adam {
public:
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    void step(const ParamRefs& params);

    int t() const { return t_; }
    const std::vector<Mat>& m() const { return m_; }
    const std::vector<Mat>& v() const { return v_; }
    void set_state(int t, std::vector<Mat> m, std::vector<Mat> v);

private:
    int t_ = 0;
    std::vector<Mat> m_, v_;
};

// y = x W + b, x is [n x in].
class Linear {
public:
    Param W, b;

    Linear(const std::string& name, int in, int out, Rng& rng);
    Mat forward(const Mat& x);
    Mat backward(const Mat& dy);
    ParamRefs params() { return {&W, &b}; }

private:
    Mat x_cache_;
};

class LeakyRelu {
public:
    explicit LeakyRelu(double slope = 0.2) : slope_(slope) {}
    Mat forward(const Mat& x);
    Mat backward(const Mat& dy) const;

private:
    double slope_;
    Mat x_cache_;
};

class Relu {
public:
    Mat forward(const Mat& x);
    Mat backward(const Mat& dy) const;

private:
    Mat x_cache_;
};

// Inverted dropout: active only in train mode, identity otherwise.
class Dropout {
public:
    explicit Dropout(double rate) : rate_(rate) {}
    Mat forward(const Mat& x, bool train, Rng& rng);
    Mat backward(const Mat& dy) const;

private:
    double rate_;
    bool active_ = false;
    Mat mask_;
};

Mat softmax_rows(const Mat& logits);

// Mean binary cross-entropy over logits with targets in {0,1}. Numerically
// stable log1p form; optionally emits d(mean loss)/d(logits).
double bce_with_logits(const Vec& logits, const Vec& targets, Vec* dlogits = nullptr);

// Softmax cross-entropy with per-class weights, normalized by the summed
// weight of the batch so zero-weight classes drop out of the loss exactly.
double weighted_softmax_ce(const Mat& logits, const std::vector<int>& labels,
                           const Vec& class_weights, Mat* dlogits = nullptr);

}  // namespace ergsyn::nn
