#pragma once

#include <optional>
#include <string>
#include <vector>

#include "holefill/data/generator.hpp"
#include "holefill/fairing/energy.hpp"
#include "holefill/net/model.hpp"

namespace holefill::pipeline {

enum class Method { kNet, kNearestPlane, kMeanValue, kGtProjection };

Method method_from_string(const std::string& name);
std::string method_name(Method m);

struct RunConfig {
  Method method = Method::kNearestPlane;
  fairing::Tolerances tolerances;
  fairing::EnergyWeights weights;
  std::uint64_t seed = 1;
  int quadrature_order = 4;
  int boundary_samples = 128;
  std::string checkpoint_path;
  std::string output_dir;
};

// Flat key = value text file; unknown keys are an error.
RunConfig load_run_config(const std::string& path);

struct FillRow {
  std::string case_id;
  std::string method;
  double parameter_error = std::numeric_limits<double>::quiet_NaN();
  double g0 = std::numeric_limits<double>::quiet_NaN();
  double g1 = std::numeric_limits<double>::quiet_NaN();
  double g2 = std::numeric_limits<double>::quiet_NaN();
  bool pass_g0 = false, pass_g1 = false, pass_g2 = false;
  bool self_intersecting = false;
  bool failed = false;  // projection/solver failure; counts against STR
  std::string error;
  double solver_epsilon = 0.0;
  double wall_ms = 0.0;
};

struct FillReport {
  std::vector<FillRow> rows;

  double str(int level) const;       // pass fraction for G0/G1/G2 (level 0..2)
  double mean_parameter_error() const;
};

struct FillResult {
  geom::BSplineSurface filled;
  param::PCurve pcurve;
  FillRow row;
  bool has_surface = false;
};

// One hole: method-selected parameterization, constraint assembly along
// the pcurve, linear solve, boundary-error evaluation. Failures are
// recorded in the row, not thrown.
FillResult run_fill(const RunConfig& config, const data::DatasetRecord& record,
                    net::Model* model, const std::string& case_id);

// Raw boundary without ground truth (normalized internally; the filled
// surface is returned in the original coordinates).
FillResult run_fill_raw(const RunConfig& config, const param::HoleBoundary& boundary,
                        net::Model* model, const std::string& case_id);

// Whole-dataset evaluation; rows sorted by case id.
FillReport run_eval(const RunConfig& config, const std::vector<data::DatasetRecord>& records,
                    net::Model* model);

void save_report_csv(const FillReport& report, const std::string& path);
std::string report_summary(const FillReport& report);

// Triangulated patch OBJ (res x res vertex grid) with the trimming
// polyline appended as line records when given, plus a per-vertex mean
// curvature CSV sidecar.
void export_mesh(const geom::BSplineSurface& surface, const param::PCurve* pcurve,
                 int resolution, const std::string& obj_path, const std::string& curvature_csv);

}  // namespace holefill::pipeline
