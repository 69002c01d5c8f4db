#pragma once

#include <array>
#include <span>
#include <vector>

#include "holefill/common.hpp"

namespace holefill::voxel {

// Per-axis integer bin indices at resolution dv (bin count = 1/dv).
struct VoxelLabelSet {
  double resolution = 0.1;
  std::vector<std::array<int, 3>> indices;

  int bins() const;  // V_N, validated integer
};

// Coarse labels plus per-axis sub-bin indices in [0, factor).
struct RefinementLabelSet {
  VoxelLabelSet coarse;
  int factor = 10;  // resolution ratio, integer >= 2
  std::vector<std::array<int, 3>> sub;

  double fine_resolution() const { return coarse.resolution / factor; }
};

// Integer bin count for dv; throws std::invalid_argument when 1/dv is
// not an integer (within 1e-12).
int bin_count(double dv);

// Floor binning per axis; coordinates must lie in [0,1], values exactly
// at 1.0 clamp into the last bin. Out-of-range input throws
// std::invalid_argument (callers normalize first).
VoxelLabelSet encode(std::span<const Vec3> points, double dv);

// Bin-center reconstruction: (index + 0.5) * dv.
std::vector<Vec3> decode(const VoxelLabelSet& labels);

// Coarse + sub-bin labels; dv_low / dv_high must be an integer ratio.
RefinementLabelSet encode_refinement(std::span<const Vec3> points, double dv_low,
                                     double dv_high);

// Center reconstruction at the fine resolution.
std::vector<Vec3> decode_refinement(const RefinementLabelSet& labels);

// Row-major collapse of a 3-axis label into one categorical index.
// Kept only for comparing against the single-label formulation; the
// (V_N)^3 class space is impractical for training.
long flatten_3d(const std::array<int, 3>& index, int bins);

}  // namespace holefill::voxel
