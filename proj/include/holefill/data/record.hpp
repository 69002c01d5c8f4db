#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "holefill/geom/bspline_surface.hpp"
#include "holefill/param/hole_boundary.hpp"
#include "holefill/voxel/codec.hpp"

namespace holefill::data {

// One (boundary, target surface) training pair, normalized into [0,1)^3.
// The boundary is the target surface evaluated along pcurve_gt, so the
// pair has zero boundary error by construction.
struct DatasetRecord {
  param::HoleBoundary boundary;
  geom::BSplineSurface target_surface;
  voxel::RefinementLabelSet labels;
  std::vector<double> knots_u_interior;
  std::vector<double> knots_v_interior;
  param::PCurve pcurve_gt;

  std::uint64_t surface_id = 0;
  std::uint64_t seed = 0;
  double noise_level = 0.0;

  // x_normalized = x_world * norm_scale + norm_offset
  double norm_scale = 1.0;
  Vec3 norm_offset = Vec3::Zero();

  Vec3 denormalize(const Vec3& p) const { return (p - norm_offset) / norm_scale; }
};

struct DatasetManifest {
  int version = 1;
  std::uint64_t corpus_seed = 0;
  int count = 0;
  double split_ratio = 0.9;
  std::string generator = "holefill-synth/1";
};

nlohmann::json record_to_json(const DatasetRecord& r);
DatasetRecord record_from_json(const nlohmann::json& j);

// Newline-delimited JSON records plus a sidecar manifest ("<path>.manifest.json").
void save_dataset(const std::vector<DatasetRecord>& records, const DatasetManifest& manifest,
                  const std::string& path);
std::vector<DatasetRecord> load_dataset(const std::string& path,
                                        DatasetManifest* manifest = nullptr);

}  // namespace holefill::data
