#pragma once

#include <vector>

#include "holefill/geom/knot_vector.hpp"

namespace holefill::geom {

// Position plus all partial derivatives through third order.
struct SurfaceJet {
  Vec3 position;
  Vec3 du, dv;
  Vec3 duu, duv, dvv;
  Vec3 duuu, duuv, duvv, dvvv;

  // deriv(a, b) = d^{a+b} S / du^a dv^b for a+b <= 3.
  const Vec3& deriv(int a, int b) const;
};

struct NormalCurvature {
  Vec3 normal;   // unit length
  double kappa;  // normal curvature along the requested direction
};

// Tensor-product B-spline surface. Control points are stored row-major
// with the u index as the row: cp(i, j) = control_points[i * count_v + j].
struct BSplineSurface {
  KnotVector knots_u, knots_v;
  std::vector<Vec3> control_points;

  int count_u() const { return knots_u.control_count(); }
  int count_v() const { return knots_v.control_count(); }
  int degree_u() const { return knots_u.degree; }
  int degree_v() const { return knots_v.degree; }

  Vec3& cp(int i, int j) { return control_points[i * count_v() + j]; }
  const Vec3& cp(int i, int j) const { return control_points[i * count_v() + j]; }

  void validate() const;

  Vec3 evaluate(double u, double v) const;
  SurfaceJet jet(double u, double v) const;

  // x -> x * scale + offset applied to every control point.
  void transform(double scale, const Vec3& offset);
};

// Unit normal from first derivatives; throws SingularityError when the
// tangent plane is degenerate.
Vec3 unit_normal(const SurfaceJet& jet);

// Normal curvature along a parametric direction: II(d,d) / I(d,d).
NormalCurvature surface_normal_and_curvature(const BSplineSurface& surface, double u, double v,
                                             const Vec2& direction);
NormalCurvature normal_curvature_from_jet(const SurfaceJet& jet, const Vec2& direction);

double mean_curvature(const SurfaceJet& jet);

}  // namespace holefill::geom
