#pragma once

#include <optional>

#include "holefill/geom/bspline_surface.hpp"
#include "holefill/param/hole_boundary.hpp"

namespace holefill::param {

struct ProjectionResult {
  double u = 0.0, v = 0.0;
  double distance = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Closest-point projection of p onto the surface: Newton iteration on
// the squared distance, seeded from a grid scan (and optionally from a
// caller-provided parameter pair), parameters clamped to [0,1]^2 with a
// projected-gradient fallback on the boundary. When no seed converges
// the best candidate is returned with converged == false.
ProjectionResult project_to_surface(const geom::BSplineSurface& surface, const Vec3& p,
                                    int seed_grid = 16,
                                    std::optional<Vec2> seed = std::nullopt);

// Per-sample diagnostics carried by a projection failure.
struct ProjectionFailure : std::runtime_error {
  std::vector<ProjectionResult> per_sample;
  ProjectionFailure(const std::string& msg, std::vector<ProjectionResult> diag)
      : std::runtime_error(msg), per_sample(std::move(diag)) {}
};

// Trimming curve from closest-point projection of every boundary sample,
// seeding sample k+1 from sample k. Throws ProjectionFailure when fewer
// than `min_converged_ratio` of the samples converge.
PCurve pcurve_from_projection(const geom::BSplineSurface& surface, const HoleBoundary& boundary,
                              int seed_grid = 16, double min_converged_ratio = 0.95);

}  // namespace holefill::param
