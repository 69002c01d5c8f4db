#include "holefill/param/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace holefill::param {

namespace {

// Aspect-preserving affine map of the point set's bounding box into
// [margin, 1-margin]^2 (the longer axis fills it, the other is centered).
PCurve normalize_into_square(std::vector<Vec2> pts, double margin) {
  Vec2 lo = pts[0], hi = pts[0];
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double w = 1.0 - 2.0 * margin;
  const double extent = std::max(hi.x() - lo.x(), hi.y() - lo.y());
  const double s = extent > 0 ? w / extent : 0.0;
  PCurve out;
  out.params.reserve(pts.size());
  for (const auto& p : pts) {
    Vec2 q;
    for (int axis = 0; axis < 2; ++axis) {
      const double pad = 0.5 * (w - (hi[axis] - lo[axis]) * s);
      q[axis] = extent > 0 ? margin + pad + (p[axis] - lo[axis]) * s : 0.5;
    }
    out.params.push_back(q);
  }
  return out;
}

std::vector<double> cumulative_arc_length(const std::vector<Vec3>& samples) {
  const int n = static_cast<int>(samples.size());
  std::vector<double> cum(n + 1, 0.0);
  for (int i = 0; i < n; ++i)
    cum[i + 1] = cum[i] + (samples[(i + 1) % n] - samples[i]).norm();
  return cum;
}

}  // namespace

PCurve np_pcurve(const HoleBoundary& boundary) {
  boundary.validate();
  const FitPlane plane = nearest_plane(boundary.samples);
  std::vector<Vec2> projected;
  projected.reserve(boundary.samples.size());
  for (const auto& p : boundary.samples) projected.push_back(plane.project(p));
  return normalize_into_square(std::move(projected), kParamMargin);
}

std::vector<double> mean_value_weights(const Vec3& p, std::span<const Vec3> anchors) {
  const int m = static_cast<int>(anchors.size());
  std::vector<double> w(m, 0.0);
  constexpr double kSnap = 1e-12;

  std::vector<double> dist(m);
  for (int i = 0; i < m; ++i) {
    dist[i] = (anchors[i] - p).norm();
    if (dist[i] < kSnap) {  // Lagrange property: coincident with an anchor
      w[i] = 1.0;
      return w;
    }
  }

  std::vector<double> half_tan(m);
  for (int i = 0; i < m; ++i) {
    const Vec3 a = anchors[i] - p;
    const Vec3 b = anchors[(i + 1) % m] - p;
    const double sin_ang = a.cross(b).norm();
    const double cos_ang = a.dot(b);
    const double ang = std::atan2(sin_ang, cos_ang);
    if (ang > M_PI - 1e-9) {
      // p lies on the segment; weights degenerate to linear interpolation.
      std::fill(w.begin(), w.end(), 0.0);
      const double t = dist[i] / (dist[i] + dist[(i + 1) % m]);
      w[i] = 1.0 - t;
      w[(i + 1) % m] = t;
      return w;
    }
    half_tan[i] = std::tan(0.5 * ang);
  }

  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    w[i] = (half_tan[(i + m - 1) % m] + half_tan[i]) / dist[i];
    total += w[i];
  }
  for (auto& x : w) x /= total;
  return w;
}

PCurve mvc_pcurve(const HoleBoundary& boundary) {
  boundary.validate();
  const int n = boundary.size();
  const auto cum = cumulative_arc_length(boundary.samples);
  const double total = cum[n];

  std::vector<int> anchors = boundary.segment_offsets;
  std::sort(anchors.begin(), anchors.end());
  anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());

  std::vector<Vec2> mapped(n);
  if (anchors.size() < 3) {
    // Smooth boundary without corners: arc length straight to the circle.
    for (int k = 0; k < n; ++k) {
      const double theta = 2.0 * M_PI * cum[k] / total;
      mapped[k] = {std::cos(theta), std::sin(theta)};
    }
    return normalize_into_square(std::move(mapped), kParamMargin);
  }

  // Anchor positions on the unit circle at cumulative-arc-length angles.
  const int m = static_cast<int>(anchors.size());
  const double s0 = cum[anchors[0]];
  std::vector<Vec2> anchor_pos(m);
  std::vector<Vec3> anchor_pts(m);
  for (int i = 0; i < m; ++i) {
    const double theta = 2.0 * M_PI * (cum[anchors[i]] - s0) / total;
    anchor_pos[i] = {std::cos(theta), std::sin(theta)};
    anchor_pts[i] = boundary.samples[anchors[i]];
  }

  for (int k = 0; k < n; ++k) {
    const auto w = mean_value_weights(boundary.samples[k], anchor_pts);
    Vec2 q = Vec2::Zero();
    for (int i = 0; i < m; ++i) q += w[i] * anchor_pos[i];
    mapped[k] = q;
  }
  return normalize_into_square(std::move(mapped), kParamMargin);
}

}  // namespace holefill::param
