#include "holefill/param/hole_boundary.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "holefill/param/plane_fit.hpp"

namespace holefill::param {

void HoleBoundary::validate() const {
  const int n = size();
  if (n < 3) throw std::invalid_argument("boundary: need at least three samples");
  for (int i = 0; i < n; ++i) {
    if (!samples[i].allFinite()) throw std::invalid_argument("boundary: non-finite sample");
    if ((samples[i] - samples[(i + 1) % n]).norm() == 0.0)
      throw std::invalid_argument("boundary: coincident consecutive samples");
  }
  if (has_normals()) {
    if (static_cast<int>(normals.size()) != n)
      throw std::invalid_argument("boundary: normal count mismatch");
    for (const auto& nrm : normals)
      if (std::abs(nrm.norm() - 1.0) > 1e-8)
        throw std::invalid_argument("boundary: normals must be unit length");
  }
  if (has_curvatures() && static_cast<int>(curvatures.size()) != n)
    throw std::invalid_argument("boundary: curvature count mismatch");
  for (int off : segment_offsets)
    if (off < 0 || off >= n) throw std::invalid_argument("boundary: segment offset out of range");
}

void PCurve::validate() const {
  if (size() < 3) throw std::invalid_argument("pcurve: need at least three samples");
  for (const auto& p : params)
    if (p.x() < 0.0 || p.x() > 1.0 || p.y() < 0.0 || p.y() > 1.0)
      throw std::invalid_argument("pcurve: parameter outside [0,1]^2");
}

namespace {

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Proper or touching intersection of segments [a,b] and [c,d].
bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double d1 = cross2(d - c, a - c);
  const double d2 = cross2(d - c, b - c);
  const double d3 = cross2(b - a, c - a);
  const double d4 = cross2(b - a, d - a);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
      ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  auto on_segment = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return std::min(p.x(), r.x()) <= q.x() && q.x() <= std::max(p.x(), r.x()) &&
           std::min(p.y(), r.y()) <= q.y() && q.y() <= std::max(p.y(), r.y());
  };
  if (d1 == 0 && on_segment(c, a, d)) return true;
  if (d2 == 0 && on_segment(c, b, d)) return true;
  if (d3 == 0 && on_segment(a, c, b)) return true;
  if (d4 == 0 && on_segment(a, d, b)) return true;
  return false;
}

}  // namespace

bool self_intersects(const PCurve& curve) {
  const int n = curve.size();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the wrap
      if (segments_intersect(curve.params[i], curve.params[(i + 1) % n], curve.params[j],
                             curve.params[(j + 1) % n]))
        return true;
    }
  }
  return false;
}

HoleBoundary canonicalize_boundary(const HoleBoundary& boundary, int n) {
  boundary.validate();
  const int m = boundary.size();

  // Cumulative arc length over the closed loop.
  std::vector<double> cum(m + 1, 0.0);
  for (int i = 0; i < m; ++i)
    cum[i + 1] = cum[i] + (boundary.samples[(i + 1) % m] - boundary.samples[i]).norm();
  const double total = cum[m];

  auto sample_at = [&](double s) {
    s = std::fmod(s, total);
    if (s < 0) s += total;
    const auto it = std::upper_bound(cum.begin(), cum.end(), s);
    int seg = static_cast<int>(it - cum.begin()) - 1;
    seg = std::clamp(seg, 0, m - 1);
    const double len = cum[seg + 1] - cum[seg];
    const double t = len > 0 ? (s - cum[seg]) / len : 0.0;
    return std::make_tuple(seg, t);
  };

  HoleBoundary out;
  out.samples.resize(n);
  if (boundary.has_normals()) out.normals.resize(n);
  if (boundary.has_curvatures()) out.curvatures.resize(n);
  for (int k = 0; k < n; ++k) {
    const auto [seg, t] = sample_at(total * k / n);
    const int a = seg, b = (seg + 1) % m;
    out.samples[k] = (1.0 - t) * boundary.samples[a] + t * boundary.samples[b];
    if (boundary.has_normals()) {
      Vec3 nrm = (1.0 - t) * boundary.normals[a] + t * boundary.normals[b];
      const double len = nrm.norm();
      out.normals[k] = len > 0 ? Vec3(nrm / len) : boundary.normals[a];
    }
    if (boundary.has_curvatures())
      out.curvatures[k] = (1.0 - t) * boundary.curvatures[a] + t * boundary.curvatures[b];
  }

  // Counterclockwise w.r.t. the fitted plane normal (signed projected area).
  const FitPlane plane = nearest_plane(out.samples);
  double area = 0.0;
  for (int k = 0; k < n; ++k) {
    const Vec2 a = plane.project(out.samples[k]);
    const Vec2 b = plane.project(out.samples[(k + 1) % n]);
    area += cross2(a, b);
  }
  if (area < 0.0) {
    std::reverse(out.samples.begin(), out.samples.end());
    if (out.has_normals()) std::reverse(out.normals.begin(), out.normals.end());
    if (out.has_curvatures()) std::reverse(out.curvatures.begin(), out.curvatures.end());
  }

  // Start at the resampled point nearest the first segment anchor.
  const Vec3 anchor = boundary.segment_offsets.empty()
                          ? boundary.samples[0]
                          : boundary.samples[boundary.segment_offsets[0]];
  int start = 0;
  double best = (out.samples[0] - anchor).squaredNorm();
  for (int k = 1; k < n; ++k) {
    const double d = (out.samples[k] - anchor).squaredNorm();
    if (d < best) {
      best = d;
      start = k;
    }
  }
  std::rotate(out.samples.begin(), out.samples.begin() + start, out.samples.end());
  if (out.has_normals())
    std::rotate(out.normals.begin(), out.normals.begin() + start, out.normals.end());
  if (out.has_curvatures())
    std::rotate(out.curvatures.begin(), out.curvatures.begin() + start, out.curvatures.end());

  // Segment offsets: nearest new indices to the original anchors.
  for (int off : boundary.segment_offsets) {
    const Vec3& a = boundary.samples[off];
    int nearest = 0;
    double dist = (out.samples[0] - a).squaredNorm();
    for (int k = 1; k < n; ++k) {
      const double d = (out.samples[k] - a).squaredNorm();
      if (d < dist) {
        dist = d;
        nearest = k;
      }
    }
    out.segment_offsets.push_back(nearest);
  }
  std::sort(out.segment_offsets.begin(), out.segment_offsets.end());
  out.segment_offsets.erase(std::unique(out.segment_offsets.begin(), out.segment_offsets.end()),
                            out.segment_offsets.end());
  return out;
}

nlohmann::json boundary_to_json(const HoleBoundary& b) {
  nlohmann::json j;
  auto& samples = j["samples"] = nlohmann::json::array();
  for (const auto& p : b.samples) samples.push_back({p.x(), p.y(), p.z()});
  if (b.has_normals()) {
    auto& normals = j["normals"] = nlohmann::json::array();
    for (const auto& n : b.normals) normals.push_back({n.x(), n.y(), n.z()});
  }
  if (b.has_curvatures()) j["curvatures"] = b.curvatures;
  j["segment_offsets"] = b.segment_offsets;
  return j;
}

HoleBoundary boundary_from_json(const nlohmann::json& j) {
  HoleBoundary b;
  for (const auto& p : j.at("samples"))
    b.samples.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>());
  if (j.contains("normals"))
    for (const auto& p : j.at("normals"))
      b.normals.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>());
  if (j.contains("curvatures")) b.curvatures = j.at("curvatures").get<std::vector<double>>();
  if (j.contains("segment_offsets"))
    b.segment_offsets = j.at("segment_offsets").get<std::vector<int>>();
  b.validate();
  return b;
}

void save_boundary(const HoleBoundary& b, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write boundary file: " + path);
  out << boundary_to_json(b).dump(2) << "\n";
}

HoleBoundary load_boundary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open boundary file: " + path);
  nlohmann::json j;
  in >> j;
  return boundary_from_json(j);
}

nlohmann::json pcurve_to_json(const PCurve& c) {
  nlohmann::json j;
  auto& params = j["params"] = nlohmann::json::array();
  for (const auto& p : c.params) params.push_back({p.x(), p.y()});
  return j;
}

PCurve pcurve_from_json(const nlohmann::json& j) {
  PCurve c;
  for (const auto& p : j.at("params"))
    c.params.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  c.validate();
  return c;
}

void save_pcurve(const PCurve& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write pcurve file: " + path);
  out << pcurve_to_json(c).dump(2) << "\n";
}

PCurve load_pcurve(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pcurve file: " + path);
  nlohmann::json j;
  in >> j;
  return pcurve_from_json(j);
}

}  // namespace holefill::param
