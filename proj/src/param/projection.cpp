#include "holefill/param/projection.hpp"

#include <algorithm>
#include <cmath>

namespace holefill::param {

namespace {

struct NewtonOutcome {
  double u, v, f;
  bool converged;
  int iterations;
};

double half_sq_dist(const geom::BSplineSurface& s, double u, double v, const Vec3& p) {
  return 0.5 * (s.evaluate(u, v) - p).squaredNorm();
}

NewtonOutcome newton_from(const geom::BSplineSurface& surface, const Vec3& p, double u, double v,
                          int max_iters) {
  constexpr double kStepTol = 1e-10;
  double f = half_sq_dist(surface, u, v, p);
  bool stagnant = false;
  for (int iter = 1; iter <= max_iters; ++iter) {
    const geom::SurfaceJet jet = surface.jet(u, v);
    const Vec3 r = jet.position - p;
    Vec2 g(r.dot(jet.du), r.dot(jet.dv));

    // Components pinned at the domain boundary with an outward gradient
    // stay fixed (projected gradient).
    const bool pin_u = (u <= 0.0 && g.x() > 0.0) || (u >= 1.0 && g.x() < 0.0);
    const bool pin_v = (v <= 0.0 && g.y() > 0.0) || (v >= 1.0 && g.y() < 0.0);
    Vec2 pg = g;
    if (pin_u) pg.x() = 0.0;
    if (pin_v) pg.y() = 0.0;

    const double scale =
        (1.0 + r.norm()) * (1.0 + std::max(jet.du.norm(), jet.dv.norm()));
    if (pg.lpNorm<Eigen::Infinity>() <= 1e-12 * scale)
      return {u, v, f, true, iter};
    if (stagnant)  // line search could not move and the gradient stayed large
      return {u, v, f, false, iter};

    double h00 = jet.du.dot(jet.du) + r.dot(jet.duu);
    double h01 = jet.du.dot(jet.dv) + r.dot(jet.duv);
    double h11 = jet.dv.dot(jet.dv) + r.dot(jet.dvv);
    if (pin_u) {
      h00 = 1.0;
      h01 = 0.0;
    }
    if (pin_v) {
      h11 = 1.0;
      h01 = 0.0;
    }

    const double det = h00 * h11 - h01 * h01;
    Vec2 step;
    const bool newton_step = h00 > 0.0 && det > 1e-300;
    if (newton_step) {
      step = Vec2(-(h11 * pg.x() - h01 * pg.y()) / det, -(h00 * pg.y() - h01 * pg.x()) / det);
    } else {
      step = -pg / std::max({std::abs(h00), std::abs(h11), 1.0});
    }

    double un = u, vn = v, fn = f;
    if (newton_step && step.norm() < 1e-6) {
      // Inside the contraction basin the objective decrease is below
      // double precision; take the step without a line search.
      un = std::clamp(u + step.x(), 0.0, 1.0);
      vn = std::clamp(v + step.y(), 0.0, 1.0);
      fn = half_sq_dist(surface, un, vn, p);
    } else {
      double alpha = 1.0;
      for (int ls = 0; ls < 40; ++ls) {
        un = std::clamp(u + alpha * step.x(), 0.0, 1.0);
        vn = std::clamp(v + alpha * step.y(), 0.0, 1.0);
        fn = half_sq_dist(surface, un, vn, p);
        if (fn <= f) break;
        alpha *= 0.5;
      }
    }
    const double moved = std::hypot(un - u, vn - v);
    u = un;
    v = vn;
    f = std::min(f, fn);
    // Below the step tolerance, allow one more pass so the gradient
    // criterion can certify the point before giving up.
    if (moved < kStepTol) stagnant = true;
  }
  return {u, v, f, false, max_iters};
}

ProjectionResult to_result(const NewtonOutcome& out) {
  return {out.u, out.v, std::sqrt(2.0 * out.f), out.converged, out.iterations};
}

}  // namespace

ProjectionResult project_to_surface(const geom::BSplineSurface& surface, const Vec3& p,
                                    int seed_grid, std::optional<Vec2> seed) {
  constexpr int kMaxIters = 50;
  constexpr int kMaxGridSeeds = 6;

  NewtonOutcome best{0.5, 0.5, std::numeric_limits<double>::infinity(), false, 0};

  // Continuity seeding converges in a couple of steps when it is valid;
  // fall back to the grid scan when it does not.
  if (seed) {
    const NewtonOutcome out = newton_from(surface, p, seed->x(), seed->y(), kMaxIters);
    if (out.converged) return to_result(out);
    best = out;
  }

  std::vector<std::pair<double, Vec2>> candidates;
  candidates.reserve(size_t(seed_grid) * seed_grid);
  for (int i = 0; i < seed_grid; ++i) {
    for (int j = 0; j < seed_grid; ++j) {
      const double u = seed_grid > 1 ? double(i) / (seed_grid - 1) : 0.5;
      const double v = seed_grid > 1 ? double(j) / (seed_grid - 1) : 0.5;
      candidates.push_back({half_sq_dist(surface, u, v, p), Vec2(u, v)});
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<Vec2> tried;
  for (const auto& [f0, uv] : candidates) {
    if (static_cast<int>(tried.size()) >= kMaxGridSeeds) break;
    bool dup = false;
    for (const auto& t : tried)
      if ((uv - t).norm() < 1e-3) dup = true;
    if (dup) continue;
    tried.push_back(uv);
    const NewtonOutcome out = newton_from(surface, p, uv.x(), uv.y(), kMaxIters);
    const bool better = out.f < best.f * (1.0 - 1e-12) ||
                        (out.converged && !best.converged && out.f <= best.f * (1.0 + 1e-12));
    if (better || out.f < best.f) best = out;
  }
  return to_result(best);
}

PCurve pcurve_from_projection(const geom::BSplineSurface& surface, const HoleBoundary& boundary,
                              int seed_grid, double min_converged_ratio) {
  boundary.validate();
  const int n = boundary.size();
  std::vector<ProjectionResult> results(n);
  std::optional<Vec2> seed;
  int converged = 0;
  for (int k = 0; k < n; ++k) {
    results[k] = project_to_surface(surface, boundary.samples[k], seed_grid, seed);
    if (results[k].converged) {
      ++converged;
      seed = Vec2(results[k].u, results[k].v);
    } else {
      seed.reset();
    }
  }
  if (converged < min_converged_ratio * n) {
    throw ProjectionFailure("projection converged on fewer than the required fraction of samples",
                            std::move(results));
  }
  PCurve curve;
  curve.params.reserve(n);
  for (const auto& r : results) curve.params.emplace_back(r.u, r.v);
  return curve;
}

}  // namespace holefill::param
