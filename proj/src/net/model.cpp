#include "holefill/net/model.hpp"

#include <cmath>

#include "holefill/voxel/codec.hpp"

namespace holefill::net {

TrainingSample sample_from_record(const data::DatasetRecord& record) {
  TrainingSample s;
  s.id = record.seed;
  const int n = record.boundary.size();
  s.points.resize(n, 3);
  for (int k = 0; k < n; ++k) s.points.row(k) = record.boundary.samples[k].transpose();
  s.target_control_points = record.target_surface.control_points;
  s.knots_u = Eigen::Map<const Eigen::VectorXd>(record.knots_u_interior.data(),
                                                record.knots_u_interior.size());
  s.knots_v = Eigen::Map<const Eigen::VectorXd>(record.knots_v_interior.data(),
                                                record.knots_v_interior.size());
  return s;
}

Model::Model(const NetConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  grid_ = static_cast<int>(std::lround(std::sqrt(double(cfg_.cp_tokens))));
  if (grid_ * grid_ != cfg_.cp_tokens)
    throw std::invalid_argument("net: cp_tokens must be a perfect square");

  std::mt19937_64 rng(cfg_.seed);
  const int d = cfg_.d;
  embed_.init(d, rng);
  m_cp_ = xavier(cfg_.cp_tokens, cfg_.n, rng);
  m_knot_ = xavier(cfg_.knot_tokens, cfg_.n, rng);
  g_m_cp_ = Mat::Zero(cfg_.cp_tokens, cfg_.n);
  g_m_knot_ = Mat::Zero(cfg_.knot_tokens, cfg_.n);
  enc_p_.init(cfg_.l, d, cfg_.heads, cfg_.dropout, rng);
  enc_k_.init(cfg_.l, d, cfg_.heads, cfg_.dropout, rng);
  vhead1_.init(d, d, rng);
  vhead2_.init(d, 3 * cfg_.bins_low, rng);
  khead_u1_.init(cfg_.knot_tokens * d, d, rng);
  khead_u2_.init(d, 5, rng);
  khead_v1_.init(cfg_.knot_tokens * d, d, rng);
  khead_v2_.init(d, 5, rng);

  std::mt19937_64 rng2(cfg_.seed ^ 0x9e3779b97f4a7c15ull);
  embed_cp_.init(d, rng2);
  ca_.init(d, rng2);
  enc_h_.init(cfg_.l, 2 * d, cfg_.heads, cfg_.dropout, rng2);
  hhead1_.init(2 * d, 2 * d, rng2);
  hhead2_.init(2 * d, 3 * cfg_.high_classes(), rng2);
}

Labels Model::make_labels(const std::vector<Vec3>& target_control_points) const {
  Labels out;
  if (cfg_.single_stage) {
    out.low = voxel::encode(target_control_points, cfg_.dv_low()).indices;
    return out;
  }
  const auto ref =
      voxel::encode_refinement(target_control_points, cfg_.dv_low(), cfg_.dv_high());
  out.low = ref.coarse.indices;
  out.high.resize(ref.sub.size());
  for (size_t k = 0; k < ref.sub.size(); ++k)
    for (int axis = 0; axis < 3; ++axis)
      out.high[k][axis] = cfg_.high_absolute
                              ? ref.coarse.indices[k][axis] * ref.factor + ref.sub[k][axis]
                              : ref.sub[k][axis];
  return out;
}

Eigen::VectorXd Model::knot_head_forward(Linear& l1, Tanh& act, Linear& l2, const Mat& f_ktran,
                                         Eigen::VectorXd& gaps) {
  // Flatten the knot tokens row-major into one feature vector.
  Mat flat(1, f_ktran.rows() * f_ktran.cols());
  for (Eigen::Index r = 0; r < f_ktran.rows(); ++r)
    flat.block(0, r * f_ktran.cols(), 1, f_ktran.cols()) = f_ktran.row(r);
  const Mat logits = l2.forward(act.forward(l1.forward(flat)));
  const Mat soft = softmax_rows(logits);
  gaps = soft.row(0).transpose();
  Eigen::VectorXd knots(4);
  double acc = 0.0;
  for (int j = 0; j < 4; ++j) {
    acc += gaps(j);
    knots(j) = acc;
  }
  return knots;
}

Mat Model::token_projection_forward(const Mat& features) {
  cache_f_cp_ = m_cp_ * features;
  cache_f_knot_ = m_knot_ * features;
  return cache_f_cp_;
}

LowOutput Model::forward_low(const Mat& points, bool training, std::uint64_t dropout_seed) {
  if (points.rows() != cfg_.n || points.cols() != 3)
    throw std::invalid_argument("net: boundary sample matrix must be n x 3");
  if (!points.allFinite()) throw std::invalid_argument("net: non-finite boundary input");

  std::mt19937_64 drop_rng(dropout_seed);
  std::mt19937_64* rng = training && cfg_.dropout > 0.0 ? &drop_rng : nullptr;

  LowOutput out;
  cache_f_p_ = embed_.forward(points);
  out.features = cache_f_p_;
  token_projection_forward(cache_f_p_);
  const Mat f_ptran = enc_p_.forward(cache_f_cp_, rng);
  const Mat f_ktran = enc_k_.forward(cache_f_knot_, rng);
  out.logits = vhead2_.forward(vhead_act_.forward(vhead1_.forward(f_ptran)));
  out.knots_u = knot_head_forward(khead_u1_, khead_u_act_, khead_u2_, f_ktran, out.gaps_u);
  out.knots_v = knot_head_forward(khead_v1_, khead_v_act_, khead_v2_, f_ktran, out.gaps_v);

  // Argmax decode (lowest index wins ties) to voxel centers.
  const int C = cfg_.bins_low;
  out.argmax.resize(cfg_.cp_tokens);
  out.lcp.resize(cfg_.cp_tokens, 3);
  for (int t = 0; t < cfg_.cp_tokens; ++t) {
    for (int axis = 0; axis < 3; ++axis) {
      int best = 0;
      double best_val = out.logits(t, axis * C);
      for (int c = 1; c < C; ++c) {
        const double val = out.logits(t, axis * C + c);
        if (val > best_val) {
          best_val = val;
          best = c;
        }
      }
      out.argmax[t][axis] = best;
      out.lcp(t, axis) = (best + 0.5) * cfg_.dv_low();
    }
  }
  return out;
}

HighOutput Model::forward_high(const Mat& lcp, const Mat& boundary_features, bool training,
                               std::uint64_t dropout_seed) {
  if (cfg_.single_stage)
    throw std::logic_error("net: second stage disabled in single-stage configuration");
  std::mt19937_64 drop_rng(dropout_seed);
  std::mt19937_64* rng = training && cfg_.dropout > 0.0 ? &drop_rng : nullptr;

  cache_f_lcp_ = embed_cp_.forward(lcp);
  cache_f_w_ = ca_.forward(cache_f_lcp_, boundary_features);
  Mat fuse(cfg_.cp_tokens, 2 * cfg_.d);
  fuse.leftCols(cfg_.d) = cache_f_w_;
  fuse.rightCols(cfg_.d) = cache_f_lcp_;
  const Mat encoded = enc_h_.forward(fuse, rng);

  HighOutput out;
  out.logits = hhead2_.forward(hhead_act_.forward(hhead1_.forward(encoded)));

  const int C = cfg_.high_classes();
  const int R = cfg_.refine;
  out.argmax.resize(cfg_.cp_tokens);
  out.hcp.resize(cfg_.cp_tokens, 3);
  for (int t = 0; t < cfg_.cp_tokens; ++t) {
    for (int axis = 0; axis < 3; ++axis) {
      int best = 0;
      double best_val = out.logits(t, axis * C);
      for (int c = 1; c < C; ++c) {
        const double val = out.logits(t, axis * C + c);
        if (val > best_val) {
          best_val = val;
          best = c;
        }
      }
      out.argmax[t][axis] = best;
      if (cfg_.high_absolute) {
        out.hcp(t, axis) = (best + 0.5) * cfg_.dv_high();
      } else {
        // Refinement stays inside the coarse bin the first stage chose.
        const int coarse = static_cast<int>(std::floor(lcp(t, axis) / cfg_.dv_low()));
        out.hcp(t, axis) = (coarse * R + best + 0.5) * cfg_.dv_high();
      }
    }
  }
  return out;
}

namespace {

// Cross entropy over rows of (tokens x axes*C) logits; mean over all
// token-axis rows. Returns the gradient in `glogits` when requested.
double cross_entropy(const Mat& logits, const std::vector<std::array<int, 3>>& labels, int C,
                     int* correct, Mat* glogits) {
  const int tokens = static_cast<int>(logits.rows());
  const int rows = tokens * 3;
  double ce = 0.0;
  if (glogits) glogits->setZero(logits.rows(), logits.cols());
  if (correct) *correct = 0;
  for (int t = 0; t < tokens; ++t) {
    for (int axis = 0; axis < 3; ++axis) {
      const int label = labels[t][axis];
      if (label < 0 || label >= C) throw std::out_of_range("net: label outside class range");
      double mx = logits(t, axis * C);
      int arg = 0;
      for (int c = 1; c < C; ++c)
        if (logits(t, axis * C + c) > mx) {
          mx = logits(t, axis * C + c);
          arg = c;
        }
      double z = 0.0;
      for (int c = 0; c < C; ++c) z += std::exp(logits(t, axis * C + c) - mx);
      const double logz = std::log(z) + mx;
      ce += logz - logits(t, axis * C + label);
      if (correct && arg == label) ++(*correct);
      if (glogits) {
        for (int c = 0; c < C; ++c)
          (*glogits)(t, axis * C + c) =
              (std::exp(logits(t, axis * C + c) - logz) - (c == label ? 1.0 : 0.0)) / rows;
      }
    }
  }
  return ce / rows;
}

}  // namespace

LowLoss Model::loss_low(const TrainingSample& sample, const Labels& labels, bool training,
                        std::uint64_t dropout_seed, bool backward) {
  const LowOutput out = forward_low(sample.points, training, dropout_seed);
  LowLoss loss;
  loss.count = cfg_.cp_tokens * 3;

  Mat glogits;
  loss.ce = cross_entropy(out.logits, labels.low, cfg_.bins_low, &loss.correct,
                          backward ? &glogits : nullptr);

  // Knot MSE over both directions.
  const int m = static_cast<int>(sample.knots_u.size() + sample.knots_v.size());
  Eigen::VectorXd du = out.knots_u - sample.knots_u;
  Eigen::VectorXd dv = out.knots_v - sample.knots_v;
  loss.mse = (du.squaredNorm() + dv.squaredNorm()) / m;
  loss.total = loss.ce + loss.mse;
  if (std::isnan(loss.total))
    throw std::runtime_error("net: training loss is NaN (divergence)");
  if (!backward) return loss;

  // Voxel-head path.
  Mat g_ptran = vhead1_.backward(vhead_act_.backward(vhead2_.backward(glogits)));
  Mat g_f_cp = enc_p_.backward(g_ptran);

  // Knot-head path: d(mse)/d(knots) -> gaps -> logits -> flattened tokens.
  auto knot_backward = [&](Linear& l1, Tanh& act, Linear& l2, const Eigen::VectorXd& gaps,
                           const Eigen::VectorXd& diff) {
    Eigen::VectorXd dknots = 2.0 * diff / m;
    Eigen::VectorXd dgaps = Eigen::VectorXd::Zero(5);
    double acc = 0.0;
    for (int j = 3; j >= 0; --j) {
      acc += dknots(j);
      dgaps(j) = acc;
    }
    Mat gy(1, 5);
    gy.row(0) = dgaps.transpose();
    Mat ysoft(1, 5);
    ysoft.row(0) = gaps.transpose();
    const Mat glog = softmax_rows_backward(ysoft, gy);
    return l1.backward(act.backward(l2.backward(glog)));
  };
  const Mat gflat_u = knot_backward(khead_u1_, khead_u_act_, khead_u2_, out.gaps_u,
                                    out.knots_u - sample.knots_u);
  const Mat gflat_v = knot_backward(khead_v1_, khead_v_act_, khead_v2_, out.gaps_v,
                                    out.knots_v - sample.knots_v);
  Mat g_ktran = Mat::Zero(cfg_.knot_tokens, cfg_.d);
  for (int r = 0; r < cfg_.knot_tokens; ++r)
    g_ktran.row(r) =
        gflat_u.block(0, r * cfg_.d, 1, cfg_.d) + gflat_v.block(0, r * cfg_.d, 1, cfg_.d);
  Mat g_f_knot = enc_k_.backward(g_ktran);

  // Token projections back to the shared boundary features.
  g_m_cp_ += g_f_cp * cache_f_p_.transpose();
  g_m_knot_ += g_f_knot * cache_f_p_.transpose();
  const Mat g_f_p = m_cp_.transpose() * g_f_cp + m_knot_.transpose() * g_f_knot;
  embed_.backward(g_f_p);
  return loss;
}

HighLoss Model::loss_high(const Mat& lcp, const Mat& boundary_features, const Labels& labels,
                          bool training, std::uint64_t dropout_seed, bool backward) {
  const HighOutput out = forward_high(lcp, boundary_features, training, dropout_seed);
  HighLoss loss;
  loss.count = cfg_.cp_tokens * 3;
  Mat glogits;
  loss.ce = cross_entropy(out.logits, labels.high, cfg_.high_classes(), &loss.correct,
                          backward ? &glogits : nullptr);
  if (std::isnan(loss.ce)) throw std::runtime_error("net: training loss is NaN (divergence)");
  if (!backward) return loss;

  const Mat g_enc = hhead1_.backward(hhead_act_.backward(hhead2_.backward(glogits)));
  const Mat g_fuse = enc_h_.backward(g_enc);
  const Mat g_f_w = g_fuse.leftCols(cfg_.d);
  Mat g_f_lcp = g_fuse.rightCols(cfg_.d);
  g_f_lcp += ca_.backward(g_f_w);
  embed_cp_.backward(g_f_lcp);
  return loss;
}

geom::BSplineSurface Model::predict_surface(const Mat& points) {
  const LowOutput low = forward_low(points, false);
  Mat grid = low.lcp;
  if (!cfg_.single_stage) {
    const HighOutput high = forward_high(low.lcp, low.features, false);
    grid = high.hcp;
  }
  geom::BSplineSurface s;
  std::vector<double> iu(low.knots_u.data(), low.knots_u.data() + low.knots_u.size());
  std::vector<double> iv(low.knots_v.data(), low.knots_v.data() + low.knots_v.size());
  s.knots_u = geom::KnotVector::from_interior(iu, grid_, 3);
  s.knots_v = geom::KnotVector::from_interior(iv, grid_, 3);
  s.control_points.resize(cfg_.cp_tokens);
  for (int t = 0; t < cfg_.cp_tokens; ++t) s.control_points[t] = grid.row(t).transpose();
  s.validate();
  return s;
}

ParamRefs Model::stage1_params() {
  ParamRefs out;
  embed_.collect("embed", out);
  out.push_back({"proj.cp", &m_cp_, &g_m_cp_});
  out.push_back({"proj.knot", &m_knot_, &g_m_knot_});
  enc_p_.collect("enc_p", out);
  enc_k_.collect("enc_k", out);
  vhead1_.collect("vhead.l1", out);
  vhead2_.collect("vhead.l2", out);
  khead_u1_.collect("khead_u.l1", out);
  khead_u2_.collect("khead_u.l2", out);
  khead_v1_.collect("khead_v.l1", out);
  khead_v2_.collect("khead_v.l2", out);
  return out;
}

ParamRefs Model::stage2_params() {
  ParamRefs out;
  embed_cp_.collect("embed_cp", out);
  ca_.collect("ca", out);
  enc_h_.collect("enc_h", out);
  hhead1_.collect("hhead.l1", out);
  hhead2_.collect("hhead.l2", out);
  return out;
}

ParamRefs Model::all_params() {
  ParamRefs out = stage1_params();
  const ParamRefs s2 = stage2_params();
  out.insert(out.end(), s2.begin(), s2.end());
  return out;
}

void Model::zero_grads(const ParamRefs& params) {
  for (const auto& p : params) p.grad->setZero();
}

}  // namespace holefill::net
