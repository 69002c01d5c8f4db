#pragma once

#include <vector>

#include "holefill/common.hpp"
#include "holefill/data/record.hpp"
#include "holefill/geom/bspline_surface.hpp"
#include "holefill/net/config.hpp"
#include "holefill/net/layers.hpp"

namespace holefill::net {

struct TrainingSample {
  std::uint64_t id = 0;
  Mat points;                               // n x 3 boundary samples
  std::vector<Vec3> target_control_points;  // normalized, row-major grid
  Eigen::VectorXd knots_u, knots_v;         // interior knots, 4 each
};

TrainingSample sample_from_record(const data::DatasetRecord& record);

// Per-config classification targets derived from the target control points.
struct Labels {
  std::vector<std::array<int, 3>> low;   // bins_low classes per axis
  std::vector<std::array<int, 3>> high;  // high_classes per axis (two-stage only)
};

struct LowOutput {
  Mat features;                          // n x d boundary feature cache
  Mat logits;                            // cp_tokens x 3*bins_low
  Eigen::VectorXd gaps_u, gaps_v;        // softmax over the 5 knot gaps
  Eigen::VectorXd knots_u, knots_v;      // 4 strictly increasing interior knots
  std::vector<std::array<int, 3>> argmax;
  Mat lcp;                               // cp_tokens x 3 decoded voxel centers
};

struct HighOutput {
  Mat logits;  // cp_tokens x 3*high_classes
  std::vector<std::array<int, 3>> argmax;
  Mat hcp;     // cp_tokens x 3
};

struct LowLoss {
  double total = 0.0, ce = 0.0, mse = 0.0;
  int correct = 0, count = 0;
};

struct HighLoss {
  double ce = 0.0;
  int correct = 0, count = 0;
};

// Two-stage boundary-to-surface predictor with manual reverse-mode
// differentiation. Single-sample forward/backward; all randomness is
// seed-driven and training in id order is bit-reproducible.
class Model {
 public:
  explicit Model(const NetConfig& cfg);

  const NetConfig& config() const { return cfg_; }

  Labels make_labels(const std::vector<Vec3>& target_control_points) const;

  LowOutput forward_low(const Mat& points, bool training = false,
                        std::uint64_t dropout_seed = 0);
  HighOutput forward_high(const Mat& lcp, const Mat& boundary_features, bool training = false,
                          std::uint64_t dropout_seed = 0);

  // Forward + loss; when `backward` is set the parameter gradients are
  // accumulated (call zero_grads first).
  LowLoss loss_low(const TrainingSample& sample, const Labels& labels, bool training,
                   std::uint64_t dropout_seed, bool backward);
  HighLoss loss_high(const Mat& lcp, const Mat& boundary_features, const Labels& labels,
                     bool training, std::uint64_t dropout_seed, bool backward);

  // Eval-mode inference: predicted knots + control grid as a surface.
  geom::BSplineSurface predict_surface(const Mat& points);

  ParamRefs stage1_params();
  ParamRefs stage2_params();
  ParamRefs all_params();
  static void zero_grads(const ParamRefs& params);

 private:
  Mat token_projection_forward(const Mat& features);
  Eigen::VectorXd knot_head_forward(Linear& l1, Tanh& act, Linear& l2, const Mat& f_ktran,
                                    Eigen::VectorXd& gaps);

  NetConfig cfg_;
  int grid_ = 8;  // sqrt(cp_tokens)

  // Stage 1.
  PointNet embed_;
  Mat m_cp_, g_m_cp_;      // cp_tokens x n
  Mat m_knot_, g_m_knot_;  // knot_tokens x n
  Encoder enc_p_, enc_k_;
  Linear vhead1_, vhead2_;
  Tanh vhead_act_;
  Linear khead_u1_, khead_u2_, khead_v1_, khead_v2_;
  Tanh khead_u_act_, khead_v_act_;

  // Stage 2.
  PointNet embed_cp_;
  CrossAttention ca_;
  Encoder enc_h_;
  Linear hhead1_, hhead2_;
  Tanh hhead_act_;

  // Forward caches for the backward pass.
  Mat cache_f_p_, cache_f_cp_, cache_f_knot_;
  Mat cache_f_lcp_, cache_f_w_;
};

}  // namespace holefill::net
