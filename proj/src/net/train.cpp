#include "holefill/net/train.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <numeric>

namespace holefill::net {

namespace {

struct Adam {
  std::vector<Mat> m, v;
  double beta1 = 0.9, beta2 = 0.999;
  long t = 0;

  void init(const ParamRefs& params, double b1, double b2) {
    beta1 = b1;
    beta2 = b2;
    t = 0;
    m.clear();
    v.clear();
    for (const auto& p : params) {
      m.push_back(Mat::Zero(p.value->rows(), p.value->cols()));
      v.push_back(Mat::Zero(p.value->rows(), p.value->cols()));
    }
  }

  void step(const ParamRefs& params, double lr) {
    constexpr double kEps = 1e-8;
    ++t;
    const double c1 = 1.0 - std::pow(beta1, t);
    const double c2 = 1.0 - std::pow(beta2, t);
    for (size_t i = 0; i < params.size(); ++i) {
      const Mat& g = *params[i].grad;
      m[i] = beta1 * m[i] + (1.0 - beta1) * g;
      v[i] = beta2 * v[i] + (1.0 - beta2) * g.cwiseProduct(g);
      *params[i].value -=
          (lr * (m[i] / c1).array() / ((v[i] / c2).array().sqrt() + kEps)).matrix();
    }
  }
};

std::vector<int> id_order(const std::vector<TrainingSample>& samples) {
  std::vector<int> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (samples[a].id != samples[b].id) return samples[a].id < samples[b].id;
    return a < b;
  });
  return order;
}

std::uint64_t mix_seed(std::uint64_t base, int stage, int epoch, std::uint64_t extra) {
  std::uint64_t h = base ^ 0x9e3779b97f4a7c15ull;
  h = h * 1000003ull + static_cast<std::uint64_t>(stage);
  h = h * 1000003ull + static_cast<std::uint64_t>(epoch + 1);
  h = h * 1000003ull + extra;
  return h;
}

// Batches over the id-sorted order; mini-batch composition is reshuffled
// per epoch from a seed independent of the presentation order.
std::vector<std::vector<int>> make_batches(const std::vector<int>& order, int batch_size,
                                           std::uint64_t base, int stage, int epoch) {
  std::vector<int> work = order;
  if (batch_size <= 0 || batch_size >= static_cast<int>(order.size()))
    return {work};
  std::mt19937_64 rng(mix_seed(base, stage, epoch, 0xb41c5ull));
  std::shuffle(work.begin(), work.end(), rng);
  std::vector<std::vector<int>> batches;
  for (size_t k = 0; k < work.size(); k += batch_size) {
    batches.emplace_back(work.begin() + k,
                         work.begin() + std::min(work.size(), k + batch_size));
    std::sort(batches.back().begin(), batches.back().end());  // fixed reduction order
  }
  return batches;
}

}  // namespace

double eval_low_top1(Model& model, const std::vector<TrainingSample>& samples) {
  int correct = 0, total = 0;
  for (const auto& s : samples) {
    const Labels labels = model.make_labels(s.target_control_points);
    const LowOutput out = model.forward_low(s.points, false);
    for (int t = 0; t < model.config().cp_tokens; ++t)
      for (int axis = 0; axis < 3; ++axis) {
        ++total;
        if (out.argmax[t][axis] == labels.low[t][axis]) ++correct;
      }
  }
  return total ? double(correct) / total : 0.0;
}

TrainResult train(Model& model, const std::vector<TrainingSample>& samples,
                  const TrainOptions& options) {
  if (samples.empty()) throw std::invalid_argument("train: empty sample set");
  const auto order = id_order(samples);
  const std::uint64_t base_seed = model.config().seed;

  std::vector<Labels> labels(samples.size());
  for (size_t i = 0; i < samples.size(); ++i)
    labels[i] = model.make_labels(samples[i].target_control_points);

  TrainResult result;

  // Stage 1.
  {
    const ParamRefs params = model.stage1_params();
    Adam opt;
    opt.init(params, options.beta1, options.beta2);
    for (int epoch = 0; epoch < options.epochs_low; ++epoch) {
      double loss = 0.0, knot_mse = 0.0;
      long correct = 0, count = 0;
      for (const auto& batch : make_batches(order, options.batch_size, base_seed, 1, epoch)) {
        Model::zero_grads(params);
        for (int idx : batch) {
          const LowLoss l = model.loss_low(samples[idx], labels[idx], true,
                                           mix_seed(base_seed, 1, epoch, samples[idx].id),
                                           true);
          loss += l.total;
          knot_mse += l.mse;
          correct += l.correct;
          count += l.count;
        }
        for (const auto& p : params) *p.grad /= double(batch.size());
        opt.step(params, options.lr_low);
      }
      const double n = static_cast<double>(samples.size());
      result.trace.push_back({epoch, 1, loss / n, double(correct) / count});
      result.low_epochs_run = epoch + 1;
      if (options.verbose && epoch % 10 == 0)
        std::cerr << "stage1 epoch " << epoch << " loss " << loss / n << " top1 "
                  << double(correct) / count << "\n";
      if ((epoch + 1) % options.eval_every == 0 && knot_mse / n < options.early_stop_knot_mse) {
        if (eval_low_top1(model, samples) >= 1.0) break;
      }
    }
    result.low_top1 = eval_low_top1(model, samples);
  }

  if (model.config().single_stage) return result;

  // Stage 2: freeze stage 1, cache its eval-mode outputs.
  std::vector<Mat> cached_features(samples.size()), cached_lcp(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    const LowOutput out = model.forward_low(samples[i].points, false);
    cached_features[i] = out.features;
    cached_lcp[i] = out.lcp;
  }
  auto eval_high = [&]() {
    long correct = 0, count = 0;
    for (size_t i = 0; i < samples.size(); ++i) {
      const HighLoss l =
          model.loss_high(cached_lcp[i], cached_features[i], labels[i], false, 0, false);
      correct += l.correct;
      count += l.count;
    }
    return count ? double(correct) / count : 0.0;
  };

  {
    const ParamRefs params = model.stage2_params();
    Adam opt;
    opt.init(params, options.beta1, options.beta2);
    for (int epoch = 0; epoch < options.epochs_high; ++epoch) {
      double loss = 0.0;
      long correct = 0, count = 0;
      for (const auto& batch : make_batches(order, options.batch_size, base_seed, 2, epoch)) {
        Model::zero_grads(params);
        for (int idx : batch) {
          const HighLoss l = model.loss_high(cached_lcp[idx], cached_features[idx], labels[idx],
                                             true,
                                             mix_seed(base_seed, 2, epoch, samples[idx].id),
                                             true);
          loss += l.ce;
          correct += l.correct;
          count += l.count;
        }
        for (const auto& p : params) *p.grad /= double(batch.size());
        opt.step(params, options.lr_high);
      }
      const double n = static_cast<double>(samples.size());
      result.trace.push_back({epoch, 2, loss / n, double(correct) / count});
      result.high_epochs_run = epoch + 1;
      if (options.verbose && epoch % 10 == 0)
        std::cerr << "stage2 epoch " << epoch << " loss " << loss / n << " top1 "
                  << double(correct) / count << "\n";
      if ((epoch + 1) % options.eval_every == 0 && eval_high() >= 1.0) break;
    }
    result.high_top1 = eval_high();
  }
  return result;
}

void save_trace_csv(const std::vector<TraceRow>& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write loss trace: " + path);
  out << "epoch,stage,loss,top1_acc\n";
  out.precision(12);
  for (const auto& row : trace)
    out << row.epoch << "," << row.stage << "," << row.loss << "," << row.top1 << "\n";
}

}  // namespace holefill::net
