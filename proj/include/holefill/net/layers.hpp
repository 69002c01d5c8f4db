#pragma once

#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace holefill::net {

using Mat = Eigen::MatrixXd;

struct ParamRef {
  std::string name;
  Mat* value;
  Mat* grad;
};
using ParamRefs = std::vector<ParamRef>;

Mat xavier(int rows, int cols, std::mt19937_64& rng);

// Row-wise softmax and its backward given the forward output.
Mat softmax_rows(const Mat& x);
Mat softmax_rows_backward(const Mat& y, const Mat& gy);

// y = x W + b. Caches the input for the backward pass.
struct Linear {
  Mat W, b, gW, gb;
  Mat x;

  void init(int in, int out, std::mt19937_64& rng);
  Mat forward(const Mat& input);
  Mat backward(const Mat& gy);
  void collect(const std::string& prefix, ParamRefs& out);
};

struct Tanh {
  Mat y;
  Mat forward(const Mat& x);
  Mat backward(const Mat& gy) const;
};

// Per-row layer normalization with learned scale/shift.
struct LayerNorm {
  Mat gamma, beta, ggamma, gbeta;
  Mat xhat;
  Eigen::VectorXd inv_std;

  void init(int width);
  Mat forward(const Mat& x);
  Mat backward(const Mat& gy);
  void collect(const std::string& prefix, ParamRefs& out);
};

// Inverted dropout; active only when a generator is supplied.
struct Dropout {
  double p = 0.0;
  Mat mask;

  Mat forward(const Mat& x, std::mt19937_64* rng);
  Mat backward(const Mat& gy) const;
};

// Standard multi-head self-attention (per-head 1/sqrt(d_head) scaling).
struct SelfAttention {
  int heads = 1;
  Linear wq, wk, wv, wo;
  Mat Q, K, V;
  std::vector<Mat> attn;

  void init(int width, int head_count, std::mt19937_64& rng);
  Mat forward(const Mat& x);
  Mat backward(const Mat& gy);
  void collect(const std::string& prefix, ParamRefs& out);
};

// Single-head cross-attention scaled by 1/sqrt(width): queries from one
// token set, keys and values from another.
struct CrossAttention {
  Linear wq, wk, wv;
  Mat Q, K, V, attn;

  void init(int width, std::mt19937_64& rng);
  Mat forward(const Mat& queries, const Mat& context);
  // Returns the gradient w.r.t. `queries`; the context gradient is
  // discarded (the boundary feature cache is frozen upstream).
  Mat backward(const Mat& gy);
  void collect(const std::string& prefix, ParamRefs& out);
};

// Pre-norm transformer encoder layer with a tanh feed-forward block.
struct EncoderLayer {
  LayerNorm ln1, ln2;
  SelfAttention attn;
  Linear ff1, ff2;
  Tanh ff_act;
  Dropout drop_attn, drop_ff;

  void init(int width, int head_count, double dropout, std::mt19937_64& rng);
  Mat forward(const Mat& x, std::mt19937_64* rng);
  Mat backward(const Mat& gy);
  void collect(const std::string& prefix, ParamRefs& out);
};

struct Encoder {
  std::vector<EncoderLayer> layers;

  void init(int depth, int width, int head_count, double dropout, std::mt19937_64& rng);
  Mat forward(const Mat& x, std::mt19937_64* rng);
  Mat backward(const Mat& gy);
  void collect(const std::string& prefix, ParamRefs& out);
};

// Shared-weight per-point MLP (3 -> d -> d -> d with tanh between).
struct PointNet {
  Linear l1, l2, l3;
  Tanh a1, a2;

  void init(int width, std::mt19937_64& rng);
  Mat forward(const Mat& points);
  Mat backward(const Mat& gy);
  void collect(const std::string& prefix, ParamRefs& out);
};

}  // namespace holefill::net
