#include "holefill/pipeline/run.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "holefill/param/baselines.hpp"
#include "holefill/param/metrics.hpp"
#include "holefill/param/projection.hpp"

namespace holefill::pipeline {

Method method_from_string(const std::string& name) {
  if (name == "net") return Method::kNet;
  if (name == "np") return Method::kNearestPlane;
  if (name == "mvc") return Method::kMeanValue;
  if (name == "gt-projection") return Method::kGtProjection;
  throw std::invalid_argument("unknown method: " + name +
                              " (expected net|np|mvc|gt-projection)");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::kNet: return "net";
    case Method::kNearestPlane: return "np";
    case Method::kMeanValue: return "mvc";
    default: return "gt-projection";
  }
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string key, eq, value;
    if (!(ls >> key)) continue;
    if (!(ls >> eq >> value) || eq != "=")
      throw std::runtime_error("config: expected 'key = value' at line " +
                               std::to_string(lineno));
    if (key == "method")
      cfg.method = method_from_string(value);
    else if (key == "t_pos")
      cfg.tolerances.position = std::stod(value);
    else if (key == "t_norm")
      cfg.tolerances.normal = std::stod(value);
    else if (key == "t_curv")
      cfg.tolerances.curvature = std::stod(value);
    else if (key == "lambda_pos")
      cfg.weights.position = std::stod(value);
    else if (key == "lambda_norm")
      cfg.weights.normal = std::stod(value);
    else if (key == "lambda_curv")
      cfg.weights.curvature = std::stod(value);
    else if (key == "seed")
      cfg.seed = std::stoull(value);
    else if (key == "quadrature_order")
      cfg.quadrature_order = std::stoi(value);
    else if (key == "boundary_samples")
      cfg.boundary_samples = std::stoi(value);
    else if (key == "checkpoint")
      cfg.checkpoint_path = value;
    else if (key == "output_dir")
      cfg.output_dir = value;
    else
      throw std::runtime_error("config: unknown key '" + key + "'");
  }
  if (cfg.tolerances.position <= 0 || cfg.tolerances.normal <= 0 ||
      cfg.tolerances.curvature <= 0)
    throw std::runtime_error("config: tolerances must be positive");
  return cfg;
}

double FillReport::str(int level) const {
  if (rows.empty()) return 0.0;
  int pass = 0;
  for (const auto& r : rows) {
    const bool p = level == 0 ? r.pass_g0 : level == 1 ? r.pass_g1 : r.pass_g2;
    if (p && !r.failed) ++pass;
  }
  return double(pass) / rows.size();
}

double FillReport::mean_parameter_error() const {
  double sum = 0.0;
  int count = 0;
  for (const auto& r : rows)
    if (!std::isnan(r.parameter_error)) {
      sum += r.parameter_error;
      ++count;
    }
  return count ? sum / count : std::numeric_limits<double>::quiet_NaN();
}

namespace {

Mat boundary_matrix(const param::HoleBoundary& b) {
  Mat points(b.size(), 3);
  for (int k = 0; k < b.size(); ++k) points.row(k) = b.samples[k].transpose();
  return points;
}

geom::KnotVector uniform_interior_knots() {
  return geom::KnotVector::clamped_uniform(8, 3);
}

struct MethodOutcome {
  param::PCurve pcurve;
  fairing::SurfaceLayout layout;
  // Projection surface used to freeze the cross-boundary metric; null
  // for plane/coordinate baselines.
  std::optional<geom::BSplineSurface> projection_surface;
};

MethodOutcome run_method(const RunConfig& config, const param::HoleBoundary& boundary,
                         const data::DatasetRecord* record, net::Model* model) {
  MethodOutcome out;
  switch (config.method) {
    case Method::kNearestPlane: {
      out.pcurve = param::np_pcurve(boundary);
      out.layout = {uniform_interior_knots(), uniform_interior_knots()};
      break;
    }
    case Method::kMeanValue: {
      out.pcurve = param::mvc_pcurve(boundary);
      out.layout = {uniform_interior_knots(), uniform_interior_knots()};
      break;
    }
    case Method::kGtProjection: {
      if (!record)
        throw std::invalid_argument("gt-projection requires a dataset record");
      out.projection_surface = record->target_surface;
      out.pcurve = param::pcurve_from_projection(*out.projection_surface, boundary);
      out.layout = {record->target_surface.knots_u, record->target_surface.knots_v};
      break;
    }
    case Method::kNet: {
      if (!model) throw std::invalid_argument("net method requires a checkpoint");
      out.projection_surface = model->predict_surface(boundary_matrix(boundary));
      out.pcurve = param::pcurve_from_projection(*out.projection_surface, boundary);
      out.layout = {out.projection_surface->knots_u, out.projection_surface->knots_v};
      break;
    }
  }
  return out;
}

FillResult fill_common(const RunConfig& config, const param::HoleBoundary& boundary,
                       const data::DatasetRecord* record, net::Model* model,
                       const std::string& case_id) {
  FillResult result;
  result.row.case_id = case_id;
  result.row.method = method_name(config.method);
  const auto t0 = std::chrono::steady_clock::now();

  try {
    MethodOutcome outcome = run_method(config, boundary, record, model);
    result.pcurve = outcome.pcurve;
    result.row.self_intersecting = param::self_intersects(outcome.pcurve);
    if (record)
      result.row.parameter_error = param::parameter_error(outcome.pcurve, record->pcurve_gt);

    const fairing::ContinuityTargets targets = fairing::make_targets(
        boundary, outcome.pcurve,
        outcome.projection_surface ? &*outcome.projection_surface : nullptr);
    const fairing::EnergySystem system = fairing::assemble_system(
        outcome.layout, outcome.pcurve, targets, config.weights, config.quadrature_order);
    fairing::SolveInfo info;
    const Eigen::MatrixXd cp = fairing::solve_filling(system, &info);
    result.row.solver_epsilon = info.epsilon;

    result.filled.knots_u = outcome.layout.knots_u;
    result.filled.knots_v = outcome.layout.knots_v;
    result.filled.control_points.resize(outcome.layout.control_count());
    for (int k = 0; k < outcome.layout.control_count(); ++k)
      result.filled.control_points[k] = cp.row(k).transpose();
    result.filled.validate();
    result.has_surface = true;

    const fairing::BoundaryErrors errors =
        fairing::boundary_error_and_str(result.filled, outcome.pcurve, targets,
                                        config.tolerances);
    result.row.g0 = errors.g0;
    result.row.g1 = errors.g1;
    result.row.g2 = errors.g2;
    result.row.pass_g0 = errors.pass_g0;
    result.row.pass_g1 = errors.pass_g1;
    result.row.pass_g2 = errors.pass_g2;
  } catch (const std::exception& e) {
    result.row.failed = true;
    result.row.error = e.what();
  }

  result.row.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace

FillResult run_fill(const RunConfig& config, const data::DatasetRecord& record,
                    net::Model* model, const std::string& case_id) {
  return fill_common(config, record.boundary, &record, model, case_id);
}

FillResult run_fill_raw(const RunConfig& config, const param::HoleBoundary& boundary,
                        net::Model* model, const std::string& case_id) {
  // Normalize into the unit cube the way dataset records are.
  param::HoleBoundary working = boundary;
  if (working.size() != config.boundary_samples)
    working = param::canonicalize_boundary(working, config.boundary_samples);

  Vec3 lo = working.samples[0], hi = working.samples[0];
  for (const auto& p : working.samples) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double extent = (hi - lo).maxCoeff();
  if (extent <= 0.0) throw std::invalid_argument("run_fill: degenerate boundary");
  constexpr double kMargin = 0.1;
  const double s = (1.0 - 2.0 * kMargin) / extent;
  Vec3 offset;
  for (int axis = 0; axis < 3; ++axis) {
    const double used = (hi[axis] - lo[axis]) * s;
    offset[axis] = kMargin + 0.5 * ((1.0 - 2.0 * kMargin) - used) - lo[axis] * s;
  }
  for (auto& p : working.samples) p = p * s + offset;
  for (auto& c : working.curvatures) c /= s;

  FillResult result = fill_common(config, working, nullptr, model, case_id);
  if (result.has_surface) {
    // Back to the caller's coordinates.
    result.filled.transform(1.0 / s, -offset / s);
    result.row.g0 /= s;  // position error scales; angles and the report flags do not
  }
  return result;
}

FillReport run_eval(const RunConfig& config, const std::vector<data::DatasetRecord>& records,
                    net::Model* model) {
  FillReport report;
  report.rows.reserve(records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    std::ostringstream id;
    id << "case_" << std::setw(4) << std::setfill('0') << i;
    report.rows.push_back(run_fill(config, records[i], model, id.str()).row);
  }
  std::sort(report.rows.begin(), report.rows.end(),
            [](const FillRow& a, const FillRow& b) { return a.case_id < b.case_id; });
  return report;
}

void save_report_csv(const FillReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  out << "case_id,method,parameter_error,g0_err,g1_err,g2_err,g0_pass,g1_pass,g2_pass,"
         "self_intersecting,failed,solver_eps,wall_ms,error\n";
  out.precision(12);
  for (const auto& r : report.rows) {
    out << r.case_id << "," << r.method << "," << r.parameter_error << "," << r.g0 << ","
        << r.g1 << "," << r.g2 << "," << int(r.pass_g0) << "," << int(r.pass_g1) << ","
        << int(r.pass_g2) << "," << int(r.self_intersecting) << "," << int(r.failed) << ","
        << r.solver_epsilon << "," << r.wall_ms << "," << r.error << "\n";
  }
}

std::string report_summary(const FillReport& report) {
  std::ostringstream os;
  os.precision(6);
  os << "cases: " << report.rows.size() << "\n";
  os << "mean parameter error: " << report.mean_parameter_error() << "\n";
  os << "STR G0: " << 100.0 * report.str(0) << "%\n";
  os << "STR G1: " << 100.0 * report.str(1) << "%\n";
  os << "STR G2: " << 100.0 * report.str(2) << "%\n";
  int failed = 0, selfx = 0;
  for (const auto& r : report.rows) {
    failed += r.failed;
    selfx += r.self_intersecting;
  }
  os << "failures: " << failed << ", self-intersecting pcurves: " << selfx << "\n";
  return os.str();
}

void export_mesh(const geom::BSplineSurface& surface, const param::PCurve* pcurve,
                 int resolution, const std::string& obj_path,
                 const std::string& curvature_csv) {
  if (resolution < 2) throw std::invalid_argument("export_mesh: resolution must be >= 2");
  std::ofstream obj(obj_path);
  if (!obj) throw std::runtime_error("cannot write mesh: " + obj_path);
  obj.precision(17);

  std::ofstream csv;
  if (!curvature_csv.empty()) {
    csv.open(curvature_csv);
    if (!csv) throw std::runtime_error("cannot write curvature csv: " + curvature_csv);
    csv << "vertex,u,v,mean_curvature\n";
    csv.precision(12);
  }

  for (int i = 0; i < resolution; ++i) {
    for (int j = 0; j < resolution; ++j) {
      const double u = double(i) / (resolution - 1);
      const double v = double(j) / (resolution - 1);
      const geom::SurfaceJet jet = surface.jet(u, v);
      obj << "v " << jet.position.x() << " " << jet.position.y() << " " << jet.position.z()
          << "\n";
      if (csv.is_open()) {
        double H = std::numeric_limits<double>::quiet_NaN();
        try {
          H = geom::mean_curvature(jet);
        } catch (const SingularityError&) {
        }
        csv << i * resolution + j + 1 << "," << u << "," << v << "," << H << "\n";
      }
    }
  }
  for (int i = 0; i + 1 < resolution; ++i) {
    for (int j = 0; j + 1 < resolution; ++j) {
      const int a = i * resolution + j + 1;
      const int b = a + 1;
      const int c = a + resolution;
      const int d = c + 1;
      obj << "f " << a << " " << b << " " << d << "\n";
      obj << "f " << a << " " << d << " " << c << "\n";
    }
  }
  if (pcurve) {
    const int base = resolution * resolution;
    for (const auto& p : pcurve->params) {
      const Vec3 q = surface.evaluate(p.x(), p.y());
      obj << "v " << q.x() << " " << q.y() << " " << q.z() << "\n";
    }
    obj << "l";
    for (int k = 0; k < pcurve->size(); ++k) obj << " " << base + k + 1;
    obj << " " << base + 1 << "\n";
  }
}

}  // namespace holefill::pipeline
