#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "holefill/common.hpp"

namespace holefill::param {

// Ordered, logically closed loop of 3D boundary samples with optional
// per-sample surface attributes. segment_offsets mark where the
// individual boundary curves of an N-sided hole begin.
struct HoleBoundary {
  std::vector<Vec3> samples;
  std::vector<Vec3> normals;       // optional: empty or same length
  std::vector<double> curvatures;  // optional: empty or same length
  std::vector<int> segment_offsets;

  int size() const { return static_cast<int>(samples.size()); }
  bool has_normals() const { return !normals.empty(); }
  bool has_curvatures() const { return !curvatures.empty(); }
  void validate() const;
};

// Closed trimming curve in the (u,v) parameter square, one sample per
// boundary sample.
struct PCurve {
  std::vector<Vec2> params;

  int size() const { return static_cast<int>(params.size()); }
  void validate() const;  // entries within [0,1]^2
};

// Proper crossing between any two non-adjacent segments of the closed
// polyline (the failure mode a distorted projection produces).
bool self_intersects(const PCurve& curve);

// Uniform arc-length resampling to n samples, oriented counterclockwise
// with respect to the best-fit plane normal, start index moved to the
// sample nearest the first segment offset. Attributes are interpolated.
HoleBoundary canonicalize_boundary(const HoleBoundary& boundary, int n = 128);

nlohmann::json boundary_to_json(const HoleBoundary& b);
HoleBoundary boundary_from_json(const nlohmann::json& j);
void save_boundary(const HoleBoundary& b, const std::string& path);
HoleBoundary load_boundary(const std::string& path);

nlohmann::json pcurve_to_json(const PCurve& c);
PCurve pcurve_from_json(const nlohmann::json& j);
void save_pcurve(const PCurve& c, const std::string& path);
PCurve load_pcurve(const std::string& path);

}  // namespace holefill::param
