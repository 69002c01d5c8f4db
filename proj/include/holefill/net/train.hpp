#pragma once

#include <string>

#include "holefill/net/model.hpp"

namespace holefill::net {

struct TrainOptions {
  int epochs_low = 400;
  int epochs_high = 300;
  double lr_low = 3e-3;
  double lr_high = 3e-3;
  double beta1 = 0.9;   // Adam moment decays
  double beta2 = 0.999;
  int batch_size = 0;   // 0 = full batch; mini-batches reshuffle per epoch
  double early_stop_knot_mse = 1e-5;
  int eval_every = 10;  // eval-mode accuracy / early-stop cadence
  bool verbose = false;
};

struct TraceRow {
  int epoch = 0;
  int stage = 1;
  double loss = 0.0;
  double top1 = 0.0;
};

struct TrainResult {
  std::vector<TraceRow> trace;
  double low_top1 = 0.0;        // eval-mode training accuracy after stage 1
  double high_top1 = 0.0;       // eval-mode training accuracy after stage 2
  int low_epochs_run = 0;
  int high_epochs_run = 0;
};

// Full-batch Adam, two stages: the first trains the embedding /
// projection / encoder / head parameters on voxel + knot targets; the
// second freezes them and trains the cross-attention refinement on its
// own targets. Samples are visited in id order so shuffled input
// produces bit-identical parameters.
TrainResult train(Model& model, const std::vector<TrainingSample>& samples,
                  const TrainOptions& options);

void save_trace_csv(const std::vector<TraceRow>& trace, const std::string& path);

// Eval-mode top-1 accuracy of the low stage over the samples.
double eval_low_top1(Model& model, const std::vector<TrainingSample>& samples);

}  // namespace holefill::net
