#include "ergsyn/nn/lstm.hpp"

#include <cmath>

#include "ergsyn/errors.hpp"

namespace ergsyn::nn {

namespace {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

LstmCell::LstmCell(const std::string& name, int input, int hidden, Rng& rng)
    : Wx(name + ".Wx", input, 4 * hidden),
      Wh(name + ".Wh", hidden, 4 * hidden),
      b(name + ".b", 1, 4 * hidden),
      input_(input),
      hidden_(hidden) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (Param* p : {&Wx, &Wh, &b})
        for (Eigen::Index i = 0; i < p->value.size(); ++i)
            p->value.data()[i] = rng.uniform(-bound, bound);
}

Mat LstmCell::forward_final(const std::vector<Mat>& xs, bool reversed) {
    const std::size_t steps = xs.size();
    if (steps == 0) throw ConfigError("lstm needs a non-empty sequence");
    const auto n = xs.front().rows();
    const int h = hidden_;

    reversed_ = reversed;
    xs_ = &xs;
    ifgo_.assign(steps, Mat());
    cs_.assign(steps, Mat());
    hs_.assign(steps, Mat());
    tanh_cs_.assign(steps, Mat());

    Mat h_prev = Mat::Zero(n, h);
    Mat c_prev = Mat::Zero(n, h);

    for (std::size_t k = 0; k < steps; ++k) {
        const std::size_t t = reversed_ ? steps - 1 - k : k;
        const Mat& x = xs[t];
        Mat z = x * Wx.value;
        z.noalias() += h_prev * Wh.value;
        z.rowwise() += b.value.row(0);

        Mat gates(n, 4 * h);
        gates.leftCols(h) = z.leftCols(h).unaryExpr([](double v) { return sigmoid(v); });
        gates.middleCols(h, h) = z.middleCols(h, h).unaryExpr([](double v) { return sigmoid(v); });
        gates.middleCols(2 * h, h) = z.middleCols(2 * h, h).array().tanh();
        gates.rightCols(h) = z.rightCols(h).unaryExpr([](double v) { return sigmoid(v); });

        Mat c = gates.middleCols(h, h).cwiseProduct(c_prev) +
                gates.leftCols(h).cwiseProduct(gates.middleCols(2 * h, h));
        Mat tanh_c = c.array().tanh();
        Mat h_new = gates.rightCols(h).cwiseProduct(tanh_c);

        ifgo_[k] = std::move(gates);
        cs_[k] = c;
        tanh_cs_[k] = std::move(tanh_c);
        hs_[k] = h_new;
        h_prev = hs_[k];
        c_prev = std::move(c);
    }
    return hs_.back();
}

std::vector<Mat> LstmCell::backward_final(const Mat& dh_final) {
    const std::vector<Mat>& xs = *xs_;
    const std::size_t steps = xs.size();
    const auto n = dh_final.rows();
    const int h = hidden_;

    std::vector<Mat> dxs(steps, Mat::Zero(n, input_));
    Mat dh = dh_final;
    Mat dc = Mat::Zero(n, h);

    for (std::size_t k = steps; k-- > 0;) {
        const std::size_t t = reversed_ ? steps - 1 - k : k;
        const Mat& gates = ifgo_[k];
        const auto i = gates.leftCols(h);
        const auto f = gates.middleCols(h, h);
        const auto g = gates.middleCols(2 * h, h);
        const auto o = gates.rightCols(h);
        const Mat& tanh_c = tanh_cs_[k];
        const Mat c_prev = (k == 0) ? Mat::Zero(n, h) : cs_[k - 1];
        const Mat h_prev = (k == 0) ? Mat::Zero(n, h) : hs_[k - 1];

        const Mat d_o = dh.cwiseProduct(tanh_c);
        dc += dh.cwiseProduct(o).cwiseProduct(
            (1.0 - tanh_c.array().square()).matrix());

        const Mat d_i = dc.cwiseProduct(g);
        const Mat d_g = dc.cwiseProduct(i);
        const Mat d_f = dc.cwiseProduct(c_prev);

        Mat dz(n, 4 * h);
        dz.leftCols(h) = d_i.cwiseProduct(i.cwiseProduct((1.0 - i.array()).matrix()));
        dz.middleCols(h, h) = d_f.cwiseProduct(f.cwiseProduct((1.0 - f.array()).matrix()));
        dz.middleCols(2 * h, h) = d_g.cwiseProduct((1.0 - g.array().square()).matrix());
        dz.rightCols(h) = d_o.cwiseProduct(o.cwiseProduct((1.0 - o.array()).matrix()));

        Wx.grad.noalias() += xs[t].transpose() * dz;
        Wh.grad.noalias() += h_prev.transpose() * dz;
        b.grad.row(0) += dz.colwise().sum();

        dxs[t] = dz * Wx.value.transpose();
        dh = dz * Wh.value.transpose();
        dc = dc.cwiseProduct(f);
    }
    return dxs;
}

BiLstm::BiLstm(const std::string& name, int input, int hidden, Rng& rng)
    : fwd_(name + ".fwd", input, hidden, rng), bwd_(name + ".bwd", input, hidden, rng) {}

Mat BiLstm::forward_final(const std::vector<Mat>& xs) {
    const Mat hf = fwd_.forward_final(xs, false);
    const Mat hb = bwd_.forward_final(xs, true);
    Mat out(hf.rows(), hf.cols() + hb.cols());
    out << hf, hb;
    return out;
}

std::vector<Mat> BiLstm::backward_final(const Mat& d_concat) {
    const int h = fwd_.hidden();
    std::vector<Mat> dxs = fwd_.backward_final(d_concat.leftCols(h));
    const std::vector<Mat> dxs_b = bwd_.backward_final(d_concat.rightCols(h));
    for (std::size_t t = 0; t < dxs.size(); ++t) dxs[t] += dxs_b[t];
    return dxs;
}

ParamRefs BiLstm::params() {
    ParamRefs out = fwd_.params();
    const ParamRefs bp = bwd_.params();
    out.insert(out.end(), bp.begin(), bp.end());
    return out;
}

}  // namespace ergsyn::nn
