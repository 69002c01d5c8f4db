#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "holefill/net/checkpoint.hpp"
#include "holefill/net/train.hpp"

using namespace holefill;
using net::Labels;
using net::Mat;
using net::Model;
using net::NetConfig;
using net::TrainingSample;

namespace {

NetConfig tiny_config(std::uint64_t seed = 1) {
  NetConfig cfg;
  cfg.n = 16;
  cfg.d = 16;
  cfg.l = 1;
  cfg.heads = 2;
  cfg.seed = seed;
  return cfg;
}

TrainingSample random_sample(const NetConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.05, 0.95);
  TrainingSample s;
  s.id = seed;
  s.points.resize(cfg.n, 3);
  for (int k = 0; k < cfg.n; ++k)
    s.points.row(k) = Eigen::RowVector3d(uni(rng), uni(rng), uni(rng));
  s.target_control_points.resize(cfg.cp_tokens);
  for (auto& p : s.target_control_points) p = Vec3(uni(rng), uni(rng), uni(rng));
  auto knots = [&]() {
    Eigen::VectorXd k(4);
    std::vector<double> v = {uni(rng), uni(rng), uni(rng), uni(rng)};
    std::sort(v.begin(), v.end());
    for (int i = 0; i < 4; ++i) k(i) = 0.2 + 0.6 * v[i];
    return k;
  };
  s.knots_u = knots();
  s.knots_v = knots();
  return s;
}

net::ParamRef find_param(const net::ParamRefs& refs, const std::string& name) {
  for (const auto& r : refs)
    if (r.name == name) return r;
  throw std::runtime_error("missing parameter " + name);
}

double rel_err(double a, double b) {
  // below the finite-difference cancellation noise both values are zero
  if (std::abs(a - b) < 1e-8) return 0.0;
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

}  // namespace

TEST_CASE("pointnet: weight sharing, permutation, zero last layer") {
  NetConfig cfg = tiny_config(3);
  Model model(cfg);
  Mat points(cfg.n, 3);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(0.05, 0.95);
  for (int k = 0; k < cfg.n; ++k)
    points.row(k) = Eigen::RowVector3d(uni(rng), uni(rng), uni(rng));
  points.row(7) = points.row(2);  // duplicate point

  const auto out = model.forward_low(points, false);
  CHECK((out.features.row(7) - out.features.row(2)).cwiseAbs().maxCoeff() == 0.0);

  // permuting the input permutes the per-point features identically
  Mat perm = points;
  perm.row(0).swap(perm.row(9));
  const auto out2 = model.forward_low(perm, false);
  CHECK((out2.features.row(0) - out.features.row(9)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((out2.features.row(9) - out.features.row(0)).cwiseAbs().maxCoeff() == 0.0);

  // zero final embedding layer collapses all features to the bias
  auto params = model.stage1_params();
  find_param(params, "embed.l3.W").value->setZero();
  find_param(params, "embed.l3.b").value->setZero();
  const auto out3 = model.forward_low(points, false);
  CHECK(out3.features.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("encoder: depth zero runs; attention rows sum to one; single token is identity") {
  NetConfig cfg = tiny_config(7);
  cfg.l = 0;
  Model model(cfg);
  Mat points = random_sample(cfg, 11).points;
  const auto out = model.forward_low(points, false);
  CHECK(out.logits.allFinite());

  net::SelfAttention attn;
  std::mt19937_64 rng(13);
  attn.init(16, 2, rng);
  Mat tokens = net::xavier(10, 16, rng);
  attn.forward(tokens);
  for (const auto& a : attn.attn)
    for (int r = 0; r < a.rows(); ++r)
      CHECK(a.row(r).sum() == doctest::Approx(1.0).epsilon(1e-6));

  Mat single = net::xavier(1, 16, rng);
  attn.forward(single);
  for (const auto& a : attn.attn) CHECK(a(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cross attention: single context row, shift invariance, direct formula") {
  std::mt19937_64 rng(17);
  net::CrossAttention ca;
  ca.init(8, rng);

  Mat queries = net::xavier(64, 8, rng);
  Mat context1 = net::xavier(1, 8, rng);
  const Mat out1 = ca.forward(queries, context1);
  const Mat v1 = (context1 * ca.wv.W).rowwise() + ca.wv.b.row(0);
  for (int r = 0; r < out1.rows(); ++r)
    CHECK((out1.row(r) - v1.row(0)).cwiseAbs().maxCoeff() < 1e-12);

  // adding a constant to all score logits leaves the weights unchanged
  Mat scores = net::xavier(6, 5, rng);
  const Mat w0 = net::softmax_rows(scores);
  const Mat w1 = net::softmax_rows((scores.array() + 3.7).matrix());
  CHECK((w0 - w1).cwiseAbs().maxCoeff() < 1e-12);

  // random small case against the formula written out directly
  Mat context = net::xavier(4, 8, rng);
  const Mat out = ca.forward(queries, context);
  const Mat Q = (queries * ca.wq.W).rowwise() + ca.wq.b.row(0);
  const Mat K = (context * ca.wk.W).rowwise() + ca.wk.b.row(0);
  const Mat V = (context * ca.wv.W).rowwise() + ca.wv.b.row(0);
  const Mat want = net::softmax_rows(Q * K.transpose() / std::sqrt(8.0)) * V;
  CHECK((out - want).cwiseAbs().maxCoeff() < 1e-10);
  for (int r = 0; r < ca.attn.rows(); ++r)
    CHECK(ca.attn.row(r).sum() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("knot head: uniform gaps, hand-set logits, monotonicity") {
  NetConfig cfg = tiny_config(19);
  Model model(cfg);
  auto params = model.stage1_params();
  const TrainingSample sample = random_sample(cfg, 23);

  // zeroed head -> equal gap logits -> knots (1/5, 2/5, 3/5, 4/5)
  find_param(params, "khead_u.l2.W").value->setZero();
  find_param(params, "khead_u.l2.b").value->setZero();
  auto out = model.forward_low(sample.points, false);
  for (int j = 0; j < 4; ++j)
    CHECK(out.knots_u(j) == doctest::Approx((j + 1) / 5.0).epsilon(1e-12));

  // bias (ln 2, 0, 0, 0, 0) -> gaps (2,1,1,1,1)/6 -> knots (1/3,1/2,2/3,5/6)
  (*find_param(params, "khead_u.l2.b").value)(0, 0) = std::log(2.0);
  out = model.forward_low(sample.points, false);
  CHECK(out.knots_u(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(out.knots_u(1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(out.knots_u(2) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(out.knots_u(3) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));

  // monotonicity holds for arbitrary parameters
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    Model m(tiny_config(seed));
    const auto o = m.forward_low(random_sample(tiny_config(seed), seed).points, false);
    for (const auto* knots : {&o.knots_u, &o.knots_v}) {
      double prev = 0.0;
      for (int j = 0; j < 4; ++j) {
        CHECK((*knots)(j) > prev);
        CHECK((*knots)(j) < 1.0);
        prev = (*knots)(j);
      }
    }
  }
}

TEST_CASE("low stage decode lies on the coarse voxel-center lattice") {
  NetConfig cfg = tiny_config(29);
  Model model(cfg);
  const auto out = model.forward_low(random_sample(cfg, 31).points, false);
  for (int t = 0; t < cfg.cp_tokens; ++t)
    for (int axis = 0; axis < 3; ++axis) {
      const double c = out.lcp(t, axis);
      const double nearest = (std::round(c / 0.1 - 0.5) + 0.5) * 0.1;
      CHECK(std::abs(c - nearest) < 1e-12);
      CHECK(c >= 0.05 - 1e-12);
      CHECK(c <= 0.95 + 1e-12);
    }

  const auto again = model.forward_low(random_sample(cfg, 31).points, false);
  CHECK((again.logits - out.logits).cwiseAbs().maxCoeff() == 0.0);
  CHECK((again.lcp - out.lcp).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("high stage refinement stays inside its coarse bin; ties pick index zero") {
  NetConfig cfg = tiny_config(37);
  Model model(cfg);
  const auto sample = random_sample(cfg, 41);
  const auto low = model.forward_low(sample.points, false);
  const auto high = model.forward_high(low.lcp, low.features, false);
  for (int t = 0; t < cfg.cp_tokens; ++t) {
    CHECK((high.hcp.row(t) - low.lcp.row(t)).cwiseAbs().maxCoeff() <= 0.05 + 1e-12);
    CHECK((high.hcp.row(t) - low.lcp.row(t)).norm() <= std::sqrt(3.0) * 0.05 + 1e-12);
  }

  // uniform sub logits: lowest index wins, the point sits in sub-bin 0
  auto params = model.stage2_params();
  find_param(params, "hhead.l2.W").value->setZero();
  find_param(params, "hhead.l2.b").value->setZero();
  const auto tied = model.forward_high(low.lcp, low.features, false);
  for (int t = 0; t < cfg.cp_tokens; ++t)
    for (int axis = 0; axis < 3; ++axis) {
      CHECK(tied.argmax[t][axis] == 0);
      const double coarse_origin = low.lcp(t, axis) - 0.05;
      CHECK(tied.hcp(t, axis) == doctest::Approx(coarse_origin + 0.005).epsilon(1e-12));
    }
}

TEST_CASE("uniform logits give CE = ln C; a crafted bias matches the hand computation") {
  NetConfig cfg = tiny_config(43);
  Model model(cfg);
  auto params = model.stage1_params();
  find_param(params, "vhead.l2.W").value->setZero();
  find_param(params, "vhead.l2.b").value->setZero();
  const TrainingSample sample = random_sample(cfg, 47);
  const Labels labels = model.make_labels(sample.target_control_points);
  auto loss = model.loss_low(sample, labels, false, 0, false);
  CHECK(loss.ce == doctest::Approx(std::log(10.0)).epsilon(1e-12));

  // crafted bias: class 0 carries logit a on every axis, the rest zero
  Mat& bias = *find_param(params, "vhead.l2.b").value;
  const double a = 1.3;
  for (int axis = 0; axis < 3; ++axis) bias(0, axis * cfg.bins_low) = a;
  loss = model.loss_low(sample, labels, false, 0, false);
  double hand = 0.0;
  const double z = std::exp(a) + (cfg.bins_low - 1);
  for (int t = 0; t < cfg.cp_tokens; ++t)
    for (int axis = 0; axis < 3; ++axis) {
      const double logit = labels.low[t][axis] == 0 ? a : 0.0;
      hand += std::log(z) - logit;
    }
  hand /= cfg.cp_tokens * 3;
  CHECK(loss.ce == doctest::Approx(hand).epsilon(1e-12));
}

TEST_CASE("analytic gradients match finite differences for every parameter group") {
  NetConfig cfg = tiny_config(53);
  Model model(cfg);
  const TrainingSample sample = random_sample(cfg, 59);
  const Labels labels = model.make_labels(sample.target_control_points);
  std::mt19937_64 rng(61);

  {
    const auto params = model.stage1_params();
    Model::zero_grads(params);
    model.loss_low(sample, labels, false, 0, true);
    std::vector<Mat> grads;
    for (const auto& p : params) grads.push_back(*p.grad);

    const double h = 1e-5;
    for (size_t g = 0; g < params.size(); ++g) {
      Mat& value = *params[g].value;
      const int probes = std::min<int>(20, static_cast<int>(value.size()));
      for (int probe = 0; probe < probes; ++probe) {
        const Eigen::Index idx = static_cast<Eigen::Index>(rng() % value.size());
        const double saved = value.data()[idx];
        value.data()[idx] = saved + h;
        const double lp = model.loss_low(sample, labels, false, 0, false).total;
        value.data()[idx] = saved - h;
        const double lm = model.loss_low(sample, labels, false, 0, false).total;
        value.data()[idx] = saved;
        const double fd = (lp - lm) / (2.0 * h);
        INFO("stage1 tensor ", params[g].name, " entry ", idx);
        CHECK(rel_err(fd, grads[g].data()[idx]) < 1e-4);
      }
    }
  }

  {
    const auto low = model.forward_low(sample.points, false);
    const auto params = model.stage2_params();
    Model::zero_grads(params);
    model.loss_high(low.lcp, low.features, labels, false, 0, true);
    std::vector<Mat> grads;
    for (const auto& p : params) grads.push_back(*p.grad);

    const double h = 1e-5;
    for (size_t g = 0; g < params.size(); ++g) {
      Mat& value = *params[g].value;
      const int probes = std::min<int>(20, static_cast<int>(value.size()));
      for (int probe = 0; probe < probes; ++probe) {
        const Eigen::Index idx = static_cast<Eigen::Index>(rng() % value.size());
        const double saved = value.data()[idx];
        value.data()[idx] = saved + h;
        const double lp = model.loss_high(low.lcp, low.features, labels, false, 0, false).ce;
        value.data()[idx] = saved - h;
        const double lm = model.loss_high(low.lcp, low.features, labels, false, 0, false).ce;
        value.data()[idx] = saved;
        const double fd = (lp - lm) / (2.0 * h);
        INFO("stage2 tensor ", params[g].name, " entry ", idx);
        CHECK(rel_err(fd, grads[g].data()[idx]) < 1e-4);
      }
    }
  }
}

TEST_CASE("full-batch training is deterministic and order-independent") {
  NetConfig cfg = tiny_config(67);
  std::vector<TrainingSample> samples;
  for (std::uint64_t s = 0; s < 4; ++s) samples.push_back(random_sample(cfg, 70 + s));

  net::TrainOptions options;
  options.epochs_low = 12;
  options.epochs_high = 8;
  options.lr_low = options.lr_high = 3e-3;

  Model a(cfg);
  net::train(a, samples, options);
  Model b(cfg);
  net::train(b, samples, options);
  auto pa = a.all_params(), pb = b.all_params();
  for (size_t k = 0; k < pa.size(); ++k)
    CHECK((*pa[k].value - *pb[k].value).cwiseAbs().maxCoeff() == 0.0);

  // shuffled presentation order: identical parameters bit for bit
  std::vector<TrainingSample> shuffled = {samples[2], samples[0], samples[3], samples[1]};
  Model c(cfg);
  net::train(c, shuffled, options);
  auto pc = c.all_params();
  for (size_t k = 0; k < pa.size(); ++k)
    CHECK((*pa[k].value - *pc[k].value).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gradient descent on the convex last layer never increases the loss") {
  NetConfig cfg = tiny_config(71);
  cfg.dropout = 0.0;
  Model model(cfg);
  std::vector<TrainingSample> samples;
  for (std::uint64_t s = 0; s < 3; ++s) samples.push_back(random_sample(cfg, 80 + s));
  std::vector<Labels> labels;
  for (const auto& s : samples) labels.push_back(model.make_labels(s.target_control_points));

  net::ParamRefs probe;
  for (const auto& p : model.stage1_params())
    if (p.name == "vhead.l2.W" || p.name == "vhead.l2.b") probe.push_back(p);
  REQUIRE(probe.size() == 2);

  double prev = std::numeric_limits<double>::infinity();
  for (int step = 0; step < 40; ++step) {
    Model::zero_grads(model.stage1_params());
    double loss = 0.0;
    for (size_t i = 0; i < samples.size(); ++i)
      loss += model.loss_low(samples[i], labels[i], false, 0, true).ce;
    loss /= samples.size();
    CHECK(loss <= prev + 1e-12);
    prev = loss;
    for (const auto& p : probe) *p.value -= (0.05 / samples.size()) * (*p.grad);
  }
}

TEST_CASE("checkpoint round trip reproduces predictions") {
  NetConfig cfg = tiny_config(73);
  Model model(cfg);
  const auto sample = random_sample(cfg, 83);
  const auto surface = model.predict_surface(sample.points);

  const std::string path = "test_ckpt.json";
  net::save_checkpoint(model, path);
  Model back = net::load_checkpoint(path);
  const auto surface2 = back.predict_surface(sample.points);
  CHECK(surface2.knots_u.values == surface.knots_u.values);
  for (size_t k = 0; k < surface.control_points.size(); ++k)
    CHECK((surface2.control_points[k] - surface.control_points[k]).norm() == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("single-stage and absolute-high configurations decode coherently") {
  NetConfig single = tiny_config(79);
  single.single_stage = true;
  single.bins_low = 100;
  Model sm(single);
  const auto sample = random_sample(single, 89);
  const auto out = sm.forward_low(sample.points, false);
  for (int t = 0; t < single.cp_tokens; ++t)
    for (int axis = 0; axis < 3; ++axis) {
      const double c = out.lcp(t, axis);
      const double nearest = (std::round(c / 0.01 - 0.5) + 0.5) * 0.01;
      CHECK(std::abs(c - nearest) < 1e-12);
    }
  CHECK_THROWS_AS(sm.forward_high(out.lcp, out.features, false), std::logic_error);
  const auto labels = sm.make_labels(sample.target_control_points);
  CHECK(labels.high.empty());
  for (const auto& l : labels.low)
    for (int axis = 0; axis < 3; ++axis) CHECK(l[axis] < 100);

  NetConfig abs = tiny_config(97);
  abs.high_absolute = true;
  Model am(abs);
  const auto low = am.forward_low(sample.points, false);
  const auto high = am.forward_high(low.lcp, low.features, false);
  for (int t = 0; t < abs.cp_tokens; ++t)
    for (int axis = 0; axis < 3; ++axis) {
      const double c = high.hcp(t, axis);
      const double nearest = (std::round(c / 0.01 - 0.5) + 0.5) * 0.01;
      CHECK(std::abs(c - nearest) < 1e-12);
    }
}

TEST_CASE("labels outside the class range are rejected") {
  NetConfig cfg = tiny_config(101);
  Model model(cfg);
  const auto sample = random_sample(cfg, 103);
  Labels labels = model.make_labels(sample.target_control_points);
  labels.low[0][0] = 99;  // out of range for 10 classes
  CHECK_THROWS_AS(model.loss_low(sample, labels, false, 0, false), std::out_of_range);
}
