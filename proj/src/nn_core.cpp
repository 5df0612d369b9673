#include "ergsyn/nn/core.hpp"

#include <cmath>

#include "ergsyn/errors.hpp"

namespace ergsyn::nn {

void zero_grads(const ParamRefs& params) {
    for (Param* p : params) p->grad.setZero();
}

void sgd_step(const ParamRefs& params, double lr) {
    for (Param* p : params) p->value -= lr * p->grad;
}

std::vector<Mat> snapshot(const ParamRefs& params) {
    std::vector<Mat> values;
    values.reserve(params.size());
    for (Param* p : params) values.push_back(p->value);
    return values;
}

void restore(const ParamRefs& params, const std::vector<Mat>& values) {
    if (params.size() != values.size()) throw ConfigError("parameter snapshot size mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = values[i];
}

void Adam::step(const ParamRefs& params) {
    if (m_.empty()) {
        for (Param* p : params) {
            m_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
            v_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
        }
    }
    if (m_.size() != params.size()) throw ConfigError("optimizer slot count mismatch");
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1, t_);
    const double bc2 = 1.0 - std::pow(beta2, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
        Param* p = params[i];
        m_[i] = beta1 * m_[i] + (1.0 - beta1) * p->grad;
        v_[i] = beta2 * v_[i] + (1.0 - beta2) * p->grad.cwiseProduct(p->grad);
        const Mat m_hat = m_[i] / bc1;
        const Mat v_hat = v_[i] / bc2;
        p->value.array() -= lr * m_hat.array() / (v_hat.array().sqrt() + eps);
    }
}

void Adam::set_state(int t, std::vector<Mat> m, std::vector<Mat> v) {
    t_ = t;
    m_ = std::move(m);
    v_ = std::move(v);
}

Linear::Linear(const std::string& name, int in, int out, Rng& rng)
    : W(name + ".W", in, out), b(name + ".b", 1, out) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (Eigen::Index i = 0; i < W.value.size(); ++i)
        W.value.data()[i] = rng.uniform(-bound, bound);
    for (Eigen::Index i = 0; i < b.value.size(); ++i)
        b.value.data()[i] = rng.uniform(-bound, bound);
}

Mat Linear::forward(const Mat& x) {
    x_cache_ = x;
    return (x * W.value).rowwise() + b.value.row(0);
}

Mat Linear::backward(const Mat& dy) {
    W.grad.noalias() += x_cache_.transpose() * dy;
    b.grad.row(0) += dy.colwise().sum();
    return dy * W.value.transpose();
}

Mat LeakyRelu::forward(const Mat& x) {
    x_cache_ = x;
    return x.unaryExpr([s = slope_](double v) { return v > 0.0 ? v : s * v; });
}

Mat LeakyRelu::backward(const Mat& dy) const {
    return dy.cwiseProduct(
        x_cache_.unaryExpr([s = slope_](double v) { return v > 0.0 ? 1.0 : s; }));
}

Mat Relu::forward(const Mat& x) {
    x_cache_ = x;
    return x.cwiseMax(0.0);
}

Mat Relu::backward(const Mat& dy) const {
    return dy.cwiseProduct(x_cache_.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
}

Mat Dropout::forward(const Mat& x, bool train, Rng& rng) {
    active_ = train && rate_ > 0.0;
    if (!active_) return x;
    const double keep = 1.0 - rate_;
    mask_.resize(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < mask_.size(); ++i)
        mask_.data()[i] = rng.uniform() < keep ? 1.0 / keep : 0.0;
    return x.cwiseProduct(mask_);
}

Mat Dropout::backward(const Mat& dy) const {
    if (!active_) return dy;
    return dy.cwiseProduct(mask_);
}

Mat softmax_rows(const Mat& logits) {
    Mat out(logits.rows(), logits.cols());
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        const double mx = logits.row(r).maxCoeff();
        Eigen::RowVectorXd e = (logits.row(r).array() - mx).exp();
        out.row(r) = e / e.sum();
    }
    return out;
}

double bce_with_logits(const Vec& logits, const Vec& targets, Vec* dlogits) {
    const auto n = logits.size();
    if (n == 0 || targets.size() != n) throw ConfigError("bce batch size mismatch");
    double loss = 0.0;
    if (dlogits) dlogits->resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double z = logits[i];
        const double y = targets[i];
        loss += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
        if (dlogits) {
            const double sig = 1.0 / (1.0 + std::exp(-z));
            (*dlogits)[i] = (sig - y) / static_cast<double>(n);
        }
    }
    return loss / static_cast<double>(n);
}

double weighted_softmax_ce(const Mat& logits, const std::vector<int>& labels,
                           const Vec& class_weights, Mat* dlogits) {
    const auto n = logits.rows();
    if (n == 0 || static_cast<std::size_t>(n) != labels.size())
        throw ConfigError("cross-entropy batch size mismatch");

    double weight_sum = 0.0;
    for (int y : labels) weight_sum += class_weights[y];

    const Mat probs = softmax_rows(logits);
    if (dlogits) dlogits->setZero(logits.rows(), logits.cols());
    if (weight_sum <= 0.0) return 0.0;

    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const int y = labels[static_cast<std::size_t>(i)];
        const double w = class_weights[y];
        const double p = std::max(probs(i, y), 1e-300);
        loss += -w * std::log(p);
        if (dlogits && w != 0.0) {
            dlogits->row(i) = w * probs.row(i) / weight_sum;
            (*dlogits)(i, y) -= w / weight_sum;
        }
    }
    return loss / weight_sum;
}

}  // namespace ergsyn::nn
