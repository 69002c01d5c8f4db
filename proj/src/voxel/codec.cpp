#include "holefill/voxel/codec.hpp"

#include <cmath>

namespace holefill::voxel {

int bin_count(double dv) {
  if (dv <= 0.0) throw std::invalid_argument("voxel: resolution must be positive");
  const double n = 1.0 / dv;
  const int rounded = static_cast<int>(std::lround(n));
  if (rounded < 1 || std::abs(rounded * dv - 1.0) > 1e-12)
    throw std::invalid_argument("voxel: 1/resolution must be an integer");
  return rounded;
}

int VoxelLabelSet::bins() const { return bin_count(resolution); }

namespace {

int bin_of(double x, int bins) {
  if (x < 0.0 || x > 1.0)
    throw std::invalid_argument("voxel: coordinate outside [0,1]; normalize first");
  const int b = static_cast<int>(std::floor(x * bins));
  return b >= bins ? bins - 1 : b;  // x == 1.0 clamps into the last bin
}

}  // namespace

VoxelLabelSet encode(std::span<const Vec3> points, double dv) {
  const int bins = bin_count(dv);
  VoxelLabelSet out;
  out.resolution = dv;
  out.indices.reserve(points.size());
  for (const auto& p : points)
    out.indices.push_back({bin_of(p.x(), bins), bin_of(p.y(), bins), bin_of(p.z(), bins)});
  return out;
}

std::vector<Vec3> decode(const VoxelLabelSet& labels) {
  std::vector<Vec3> out;
  out.reserve(labels.indices.size());
  for (const auto& idx : labels.indices)
    out.emplace_back((idx[0] + 0.5) * labels.resolution, (idx[1] + 0.5) * labels.resolution,
                     (idx[2] + 0.5) * labels.resolution);
  return out;
}

RefinementLabelSet encode_refinement(std::span<const Vec3> points, double dv_low,
                                     double dv_high) {
  const int bins_low = bin_count(dv_low);
  const int bins_high = bin_count(dv_high);
  if (bins_high % bins_low != 0)
    throw std::invalid_argument("voxel: coarse/fine resolution ratio must be an integer");
  const int factor = bins_high / bins_low;
  if (factor < 2) throw std::invalid_argument("voxel: refinement factor must be >= 2");

  RefinementLabelSet out;
  out.coarse.resolution = dv_low;
  out.factor = factor;
  out.coarse.indices.reserve(points.size());
  out.sub.reserve(points.size());
  for (const auto& p : points) {
    // Decompose the fine-resolution bin so composed and direct fine
    // encodings agree exactly.
    std::array<int, 3> coarse, sub;
    for (int axis = 0; axis < 3; ++axis) {
      const int fine = bin_of(p[axis], bins_high);
      coarse[axis] = fine / factor;
      sub[axis] = fine % factor;
    }
    out.coarse.indices.push_back(coarse);
    out.sub.push_back(sub);
  }
  return out;
}

std::vector<Vec3> decode_refinement(const RefinementLabelSet& labels) {
  const double dv = labels.fine_resolution();
  std::vector<Vec3> out;
  out.reserve(labels.sub.size());
  for (size_t k = 0; k < labels.sub.size(); ++k) {
    Vec3 p;
    for (int axis = 0; axis < 3; ++axis)
      p[axis] = (labels.coarse.indices[k][axis] * labels.factor + labels.sub[k][axis] + 0.5) * dv;
    out.push_back(p);
  }
  return out;
}

long flatten_3d(const std::array<int, 3>& index, int bins) {
  return (static_cast<long>(index[0]) * bins + index[1]) * bins + index[2];
}

}  // namespace holefill::voxel
