#include "holefill/net/layers.hpp"

#include <cmath>

namespace holefill::net {

Mat xavier(int rows, int cols, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / (rows + cols));
  std::uniform_real_distribution<double> uni(-bound, bound);
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = uni(rng);
  return m;
}

Mat softmax_rows(const Mat& x) {
  Mat y(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const Eigen::RowVectorXd e = (x.row(r).array() - x.row(r).maxCoeff()).exp();
    y.row(r) = e / e.sum();
  }
  return y;
}

Mat softmax_rows_backward(const Mat& y, const Mat& gy) {
  Mat gx(y.rows(), y.cols());
  for (Eigen::Index r = 0; r < y.rows(); ++r) {
    const double dot = gy.row(r).dot(y.row(r));
    gx.row(r) = (y.row(r).array() * (gy.row(r).array() - dot)).matrix();
  }
  return gx;
}

void Linear::init(int in, int out, std::mt19937_64& rng) {
  W = xavier(in, out, rng);
  b = Mat::Zero(1, out);
  gW = Mat::Zero(in, out);
  gb = Mat::Zero(1, out);
}

Mat Linear::forward(const Mat& input) {
  x = input;
  return (input * W).rowwise() + b.row(0);
}

Mat Linear::backward(const Mat& gy) {
  gW += x.transpose() * gy;
  gb.row(0) += gy.colwise().sum();
  return gy * W.transpose();
}

void Linear::collect(const std::string& prefix, ParamRefs& out) {
  out.push_back({prefix + ".W", &W, &gW});
  out.push_back({prefix + ".b", &b, &gb});
}

Mat Tanh::forward(const Mat& x) {
  y = x.array().tanh();
  return y;
}

Mat Tanh::backward(const Mat& gy) const {
  return ((1.0 - y.array().square()) * gy.array()).matrix();
}

void LayerNorm::init(int width) {
  gamma = Mat::Ones(1, width);
  beta = Mat::Zero(1, width);
  ggamma = Mat::Zero(1, width);
  gbeta = Mat::Zero(1, width);
}

Mat LayerNorm::forward(const Mat& x) {
  constexpr double kEps = 1e-5;
  xhat.resize(x.rows(), x.cols());
  inv_std.resize(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().mean();
    inv_std(r) = 1.0 / std::sqrt(var + kEps);
    xhat.row(r) = (x.row(r).array() - mean) * inv_std(r);
  }
  Mat y = (xhat.array().rowwise() * gamma.row(0).array()).matrix();
  y.rowwise() += beta.row(0);
  return y;
}

Mat LayerNorm::backward(const Mat& gy) {
  ggamma.row(0) += (gy.array() * xhat.array()).colwise().sum().matrix();
  gbeta.row(0) += gy.colwise().sum();
  Mat gx(gy.rows(), gy.cols());
  const double d = static_cast<double>(gy.cols());
  for (Eigen::Index r = 0; r < gy.rows(); ++r) {
    const Eigen::RowVectorXd gh = gy.row(r).cwiseProduct(gamma.row(0));
    const double mean_gh = gh.mean();
    const double mean_gh_xhat = gh.dot(xhat.row(r)) / d;
    gx.row(r) =
        inv_std(r) * (gh.array() - mean_gh - xhat.row(r).array() * mean_gh_xhat).matrix();
  }
  return gx;
}

void LayerNorm::collect(const std::string& prefix, ParamRefs& out) {
  out.push_back({prefix + ".gamma", &gamma, &ggamma});
  out.push_back({prefix + ".beta", &beta, &gbeta});
}

Mat Dropout::forward(const Mat& x, std::mt19937_64* rng) {
  if (rng == nullptr || p <= 0.0) {
    mask.resize(0, 0);
    return x;
  }
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double keep = 1.0 - p;
  mask.resize(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (Eigen::Index c = 0; c < x.cols(); ++c) mask(r, c) = uni(*rng) < keep ? 1.0 / keep : 0.0;
  return x.cwiseProduct(mask);
}

Mat Dropout::backward(const Mat& gy) const {
  if (mask.size() == 0) return gy;
  return gy.cwiseProduct(mask);
}

void SelfAttention::init(int width, int head_count, std::mt19937_64& rng) {
  heads = head_count;
  wq.init(width, width, rng);
  wk.init(width, width, rng);
  wv.init(width, width, rng);
  wo.init(width, width, rng);
}

Mat SelfAttention::forward(const Mat& x) {
  const int d = static_cast<int>(x.cols());
  const int dh = d / heads;
  const double scale = 1.0 / std::sqrt(double(dh));
  Q = wq.forward(x);
  K = wk.forward(x);
  V = wv.forward(x);
  attn.assign(heads, Mat());
  Mat concat(x.rows(), d);
  for (int h = 0; h < heads; ++h) {
    const auto Qh = Q.middleCols(h * dh, dh);
    const auto Kh = K.middleCols(h * dh, dh);
    const auto Vh = V.middleCols(h * dh, dh);
    attn[h] = softmax_rows(Qh * Kh.transpose() * scale);
    concat.middleCols(h * dh, dh) = attn[h] * Vh;
  }
  return wo.forward(concat);
}

Mat SelfAttention::backward(const Mat& gy) {
  const int d = static_cast<int>(Q.cols());
  const int dh = d / heads;
  const double scale = 1.0 / std::sqrt(double(dh));
  const Mat gconcat = wo.backward(gy);
  Mat gQ(Q.rows(), d), gK(Q.rows(), d), gV(Q.rows(), d);
  for (int h = 0; h < heads; ++h) {
    const auto Qh = Q.middleCols(h * dh, dh);
    const auto Kh = K.middleCols(h * dh, dh);
    const auto Vh = V.middleCols(h * dh, dh);
    const auto gOh = gconcat.middleCols(h * dh, dh);
    const Mat gA = gOh * Vh.transpose();
    const Mat gS = softmax_rows_backward(attn[h], gA) * scale;
    gQ.middleCols(h * dh, dh) = gS * Kh;
    gK.middleCols(h * dh, dh) = gS.transpose() * Qh;
    gV.middleCols(h * dh, dh) = attn[h].transpose() * gOh;
  }
  return wq.backward(gQ) + wk.backward(gK) + wv.backward(gV);
}

void SelfAttention::collect(const std::string& prefix, ParamRefs& out) {
  wq.collect(prefix + ".wq", out);
  wk.collect(prefix + ".wk", out);
  wv.collect(prefix + ".wv", out);
  wo.collect(prefix + ".wo", out);
}

void CrossAttention::init(int width, std::mt19937_64& rng) {
  wq.init(width, width, rng);
  wk.init(width, width, rng);
  wv.init(width, width, rng);
}

Mat CrossAttention::forward(const Mat& queries, const Mat& context) {
  const double scale = 1.0 / std::sqrt(double(queries.cols()));
  Q = wq.forward(queries);
  K = wk.forward(context);
  V = wv.forward(context);
  attn = softmax_rows(Q * K.transpose() * scale);
  return attn * V;
}

Mat CrossAttention::backward(const Mat& gy) {
  const double scale = 1.0 / std::sqrt(double(Q.cols()));
  const Mat gA = gy * V.transpose();
  const Mat gS = softmax_rows_backward(attn, gA) * scale;
  const Mat gV = attn.transpose() * gy;
  wk.backward(gS.transpose() * Q);
  wv.backward(gV);
  return wq.backward(gS * K);
}

void CrossAttention::collect(const std::string& prefix, ParamRefs& out) {
  wq.collect(prefix + ".wq", out);
  wk.collect(prefix + ".wk", out);
  wv.collect(prefix + ".wv", out);
}

void EncoderLayer::init(int width, int head_count, double dropout, std::mt19937_64& rng) {
  ln1.init(width);
  ln2.init(width);
  attn.init(width, head_count, rng);
  ff1.init(width, 4 * width, rng);
  ff2.init(4 * width, width, rng);
  drop_attn.p = dropout;
  drop_ff.p = dropout;
}

Mat EncoderLayer::forward(const Mat& x, std::mt19937_64* rng) {
  const Mat a = drop_attn.forward(attn.forward(ln1.forward(x)), rng);
  const Mat x2 = x + a;
  const Mat f = drop_ff.forward(ff2.forward(ff_act.forward(ff1.forward(ln2.forward(x2)))), rng);
  return x2 + f;
}

Mat EncoderLayer::backward(const Mat& gy) {
  const Mat gf = drop_ff.backward(gy);
  const Mat gx2 = gy + ln2.backward(ff1.backward(ff_act.backward(ff2.backward(gf))));
  const Mat ga = drop_attn.backward(gx2);
  return gx2 + ln1.backward(attn.backward(ga));
}

void EncoderLayer::collect(const std::string& prefix, ParamRefs& out) {
  ln1.collect(prefix + ".ln1", out);
  attn.collect(prefix + ".attn", out);
  ln2.collect(prefix + ".ln2", out);
  ff1.collect(prefix + ".ff1", out);
  ff2.collect(prefix + ".ff2", out);
}

void Encoder::init(int depth, int width, int head_count, double dropout, std::mt19937_64& rng) {
  layers.resize(depth);
  for (auto& layer : layers) layer.init(width, head_count, dropout, rng);
}

Mat Encoder::forward(const Mat& x, std::mt19937_64* rng) {
  Mat y = x;
  for (auto& layer : layers) y = layer.forward(y, rng);
  return y;
}

Mat Encoder::backward(const Mat& gy) {
  Mat g = gy;
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) g = it->backward(g);
  return g;
}

void Encoder::collect(const std::string& prefix, ParamRefs& out) {
  for (size_t i = 0; i < layers.size(); ++i)
    layers[i].collect(prefix + "." + std::to_string(i), out);
}

void PointNet::init(int width, std::mt19937_64& rng) {
  l1.init(3, width, rng);
  l2.init(width, width, rng);
  l3.init(width, width, rng);
}

Mat PointNet::forward(const Mat& points) {
  return l3.forward(a2.forward(l2.forward(a1.forward(l1.forward(points)))));
}

Mat PointNet::backward(const Mat& gy) {
  return l1.backward(a1.backward(l2.backward(a2.backward(l3.backward(gy)))));
}

void PointNet::collect(const std::string& prefix, ParamRefs& out) {
  l1.collect(prefix + ".l1", out);
  l2.collect(prefix + ".l2", out);
  l3.collect(prefix + ".l3", out);
}

}  // namespace holefill::net
