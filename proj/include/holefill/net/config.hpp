#pragma once

#include <cstdint>
#include <stdexcept>

namespace holefill::net {

// Desk-scale two-stage predictor configuration.
struct NetConfig {
  int n = 128;          // boundary sample count
  int d = 64;           // feature width
  int l = 2;            // encoder depth per stack
  int heads = 4;        // self-attention heads
  int cp_tokens = 64;   // control-point tokens (8x8 grid)
  int knot_tokens = 4;  // interior knots per direction
  int bins_low = 10;    // classes per axis in the first stage
  int refine = 10;      // sub-bins per coarse bin in the second stage
  double dropout = 0.05;
  std::uint64_t seed = 1;

  // Alternative head layouts.
  bool single_stage = false;   // first stage only, decoded at its own resolution
  bool high_absolute = false;  // second stage predicts absolute fine bins
                               // instead of sub-bins within the coarse bin

  double dv_low() const { return 1.0 / bins_low; }
  double dv_high() const { return 1.0 / (bins_low * refine); }
  int high_classes() const { return high_absolute ? bins_low * refine : refine; }

  void validate() const {
    if (d <= 0 || n <= 0 || heads <= 0) throw std::invalid_argument("net: bad dimensions");
    if (d % heads != 0) throw std::invalid_argument("net: d must be divisible by heads");
    if (l < 0) throw std::invalid_argument("net: negative depth");
    if (bins_low < 2 || refine < 2) throw std::invalid_argument("net: bad voxel classes");
    if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("net: bad dropout");
  }
};

}  // namespace holefill::net
