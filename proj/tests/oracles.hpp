// Test-only reference implementations, kept independent of the library
// code paths they are used to check.
#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "holefill/geom/bspline_surface.hpp"

namespace oracles {

using holefill::Vec2;
using holefill::Vec3;

// Textbook Cox-de Boor recursion for a single basis function N_{i,p}(u)
// over an arbitrary knot sequence (half-open spans; u strictly inside).
inline double cox_de_boor(const std::vector<double>& t, int i, int p, double u) {
  if (p == 0) return (t[i] <= u && u < t[i + 1]) ? 1.0 : 0.0;
  double left = 0.0, right = 0.0;
  const double dl = t[i + p] - t[i];
  const double dr = t[i + p + 1] - t[i + 1];
  if (dl > 0.0) left = (u - t[i]) / dl * cox_de_boor(t, i, p - 1, u);
  if (dr > 0.0) right = (t[i + p + 1] - u) / dr * cox_de_boor(t, i + 1, p - 1, u);
  return left + right;
}

// Derivative by the difference-of-lower-degree recursion.
inline double cox_de_boor_deriv(const std::vector<double>& t, int i, int p, double u,
                                int order) {
  if (order == 0) return cox_de_boor(t, i, p, u);
  double left = 0.0, right = 0.0;
  const double dl = t[i + p] - t[i];
  const double dr = t[i + p + 1] - t[i + 1];
  if (dl > 0.0) left = p / dl * cox_de_boor_deriv(t, i, p - 1, u, order - 1);
  if (dr > 0.0) right = p / dr * cox_de_boor_deriv(t, i + 1, p - 1, u, order - 1);
  return left - right;
}

// Uniform bicubic B-spline point on an integer knot grid (control point
// (i,j) sits at parameter (i+2, j+2)).
inline Vec3 uniform_bicubic_point(const std::vector<std::vector<Vec3>>& grid, double pu,
                                  double pv) {
  const int nu = static_cast<int>(grid.size());
  const int nv = static_cast<int>(grid[0].size());
  std::vector<double> tu(nu + 4), tv(nv + 4);
  for (int k = 0; k < nu + 4; ++k) tu[k] = k;
  for (int k = 0; k < nv + 4; ++k) tv[k] = k;
  Vec3 out = Vec3::Zero();
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j)
      out += cox_de_boor(tu, i, 3, pu) * cox_de_boor(tv, j, 3, pv) * grid[i][j];
  return out;
}

// Max-relative error with the small-magnitude absolute carve-out.
inline bool close_deriv(const Vec3& got, const Vec3& truth, double rel = 1e-6,
                        double abs_small = 1e-8) {
  const double err = (got - truth).norm();
  const double mag = truth.norm();
  if (mag < 1.0) return err < std::max(rel * mag, abs_small);
  return err < rel * mag;
}

// Random 8x8 cubic test surface: jittered plane grid, knot gaps >= min_gap.
inline holefill::geom::BSplineSurface random_surface(std::mt19937_64& rng,
                                                     double min_gap = 0.05,
                                                     double amplitude = 0.25) {
  using holefill::geom::KnotVector;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto knots = [&]() {
    std::vector<double> interior(4);
    while (true) {
      for (auto& k : interior) k = uni(rng);
      std::sort(interior.begin(), interior.end());
      bool ok = interior.front() >= min_gap && interior.back() <= 1.0 - min_gap;
      for (int i = 0; ok && i < 3; ++i) ok = interior[i + 1] - interior[i] >= min_gap;
      if (ok) return KnotVector::from_interior(interior, 8, 3);
    }
  };
  holefill::geom::BSplineSurface s;
  s.knots_u = knots();
  s.knots_v = knots();
  s.control_points.resize(64);
  std::uniform_real_distribution<double> jitter(-amplitude, amplitude);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      s.cp(i, j) = Vec3(i / 7.0 + 0.3 * jitter(rng), j / 7.0 + 0.3 * jitter(rng), jitter(rng));
  return s;
}

// Flat patch reproducing S(u,v) = (u, v, 0) exactly (Greville abscissae
// as in-plane coordinates).
inline holefill::geom::BSplineSurface flat_patch(const holefill::geom::KnotVector& ku,
                                                 const holefill::geom::KnotVector& kv) {
  holefill::geom::BSplineSurface s;
  s.knots_u = ku;
  s.knots_v = kv;
  const auto gu = ku.greville();
  const auto gv = kv.greville();
  s.control_points.resize(gu.size() * gv.size());
  for (size_t i = 0; i < gu.size(); ++i)
    for (size_t j = 0; j < gv.size(); ++j)
      s.control_points[i * gv.size() + j] = Vec3(gu[i], gv[j], 0.0);
  return s;
}

// Span-aligned dense integration of the squared-derivative energy terms
// with a composite Simpson rule, about samples_per_axis^2 evaluation
// nodes in total.
inline double dense_bending_energy(const holefill::geom::BSplineSurface& s,
                                   int samples_per_axis = 400) {
  struct Node {
    double x, w;
  };
  auto nodes = [&](const holefill::geom::KnotVector& kv) {
    std::vector<Node> out;
    const int cells_per_axis = samples_per_axis / 2;
    for (int k = kv.degree; k < kv.control_count(); ++k) {
      const double a = kv.values[k], b = kv.values[k + 1];
      if (b <= a) continue;
      const int m = std::max(1, static_cast<int>(std::lround(cells_per_axis * (b - a))));
      const double h = (b - a) / m;
      // endpoint nodes are nudged into the cell so one-sided values at
      // knot lines come from the correct span
      const double nudge = 1e-9 * h;
      for (int c = 0; c < m; ++c) {
        const double x0 = a + c * h;
        out.push_back({x0 + nudge, h / 6.0});
        out.push_back({x0 + 0.5 * h, 4.0 * h / 6.0});
        out.push_back({x0 + h - nudge, h / 6.0});
      }
    }
    return out;
  };
  const auto nu = nodes(s.knots_u);
  const auto nv = nodes(s.knots_v);
  double total = 0.0;
  for (const auto& iu : nu) {
    for (const auto& iv : nv) {
      const holefill::geom::SurfaceJet jet = s.jet(iu.x, iv.x);
      const double val = jet.duu.squaredNorm() + 2.0 * jet.duv.squaredNorm() +
                         jet.dvv.squaredNorm() + jet.duuu.squaredNorm() +
                         3.0 * jet.duuv.squaredNorm() + 3.0 * jet.duvv.squaredNorm() +
                         jet.dvvv.squaredNorm();
      total += val * iu.w * iv.w;
    }
  }
  return total;
}

// Independent mean-value weight evaluation (acos-based half angles).
inline std::vector<double> mvc_weights_direct(const Vec3& p, const std::vector<Vec3>& anchors) {
  const int m = static_cast<int>(anchors.size());
  std::vector<double> w(m, 0.0);
  for (int i = 0; i < m; ++i)
    if ((anchors[i] - p).norm() < 1e-12) {
      w[i] = 1.0;
      return w;
    }
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    const Vec3 a = (anchors[i] - p).normalized();
    const Vec3 b = (anchors[(i + 1) % m] - p).normalized();
    const Vec3 c = (anchors[(i + m - 1) % m] - p).normalized();
    const double ang_next = std::acos(std::clamp(a.dot(b), -1.0, 1.0));
    const double ang_prev = std::acos(std::clamp(c.dot(a), -1.0, 1.0));
    w[i] = (std::tan(0.5 * ang_prev) + std::tan(0.5 * ang_next)) / (anchors[i] - p).norm();
    total += w[i];
  }
  for (auto& x : w) x /= total;
  return w;
}

// Quadratic-time all-pairs proper/touching segment intersection over a
// closed polyline.
inline bool brute_force_self_intersects(const std::vector<Vec2>& loop) {
  const int n = static_cast<int>(loop.size());
  auto orient = [](const Vec2& a, const Vec2& b, const Vec2& c) {
    return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
  };
  auto within = [](double a, double q, double b) {
    return std::min(a, b) <= q && q <= std::max(a, b);
  };
  for (int i = 0; i < n; ++i) {
    const Vec2 a = loop[i], b = loop[(i + 1) % n];
    for (int j = 0; j < n; ++j) {
      const int dist = (j - i + n) % n;
      if (dist <= 1 || dist == n - 1) continue;  // shared endpoints
      if (j < i) continue;                       // unordered pair once
      const Vec2 c = loop[j], d = loop[(j + 1) % n];
      const double o1 = orient(c, d, a), o2 = orient(c, d, b);
      const double o3 = orient(a, b, c), o4 = orient(a, b, d);
      if (((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) && o1 && o2 && o3 && o4) return true;
      if (o1 == 0 && within(c.x(), a.x(), d.x()) && within(c.y(), a.y(), d.y())) return true;
      if (o2 == 0 && within(c.x(), b.x(), d.x()) && within(c.y(), b.y(), d.y())) return true;
      if (o3 == 0 && within(a.x(), c.x(), b.x()) && within(a.y(), c.y(), b.y())) return true;
      if (o4 == 0 && within(a.x(), d.x(), b.x()) && within(a.y(), d.y(), b.y())) return true;
    }
  }
  return false;
}

}  // namespace oracles
