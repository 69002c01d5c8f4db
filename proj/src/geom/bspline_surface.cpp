#include "holefill/geom/bspline_surface.hpp"

#include <cmath>

namespace holefill::geom {

const Vec3& SurfaceJet::deriv(int a, int b) const {
  switch (a * 4 + b) {
    case 0: return position;        // (0,0)
    case 1: return dv;              // (0,1)
    case 2: return dvv;             // (0,2)
    case 3: return dvvv;            // (0,3)
    case 4: return du;              // (1,0)
    case 5: return duv;             // (1,1)
    case 6: return duvv;            // (1,2)
    case 8: return duu;             // (2,0)
    case 9: return duuv;            // (2,1)
    case 12: return duuu;           // (3,0)
    default: throw std::out_of_range("SurfaceJet::deriv: order beyond 3");
  }
}

void BSplineSurface::validate() const {
  knots_u.validate();
  knots_v.validate();
  if (static_cast<int>(control_points.size()) != count_u() * count_v())
    throw std::invalid_argument("surface: control grid size inconsistent with knot vectors");
  for (const auto& p : control_points)
    if (!p.allFinite()) throw std::invalid_argument("surface: non-finite control point");
}

Vec3 BSplineSurface::evaluate(double u, double v) const {
  const BasisWindow bu = basis_functions(knots_u, u, 0);
  const BasisWindow bv = basis_functions(knots_v, v, 0);
  Vec3 s = Vec3::Zero();
  for (int a = 0; a <= degree_u(); ++a)
    for (int b = 0; b <= degree_v(); ++b)
      s += bu.ders(0, a) * bv.ders(0, b) * cp(bu.first + a, bv.first + b);
  return s;
}

SurfaceJet BSplineSurface::jet(double u, double v) const {
  const BasisWindow bu = basis_functions(knots_u, u, 3);
  const BasisWindow bv = basis_functions(knots_v, v, 3);
  Vec3 acc[4][4];
  for (auto& row : acc)
    for (auto& x : row) x.setZero();
  for (int a = 0; a <= degree_u(); ++a) {
    for (int b = 0; b <= degree_v(); ++b) {
      const Vec3& p = cp(bu.first + a, bv.first + b);
      for (int i = 0; i <= 3; ++i)
        for (int j = 0; j <= 3 - i; ++j) acc[i][j] += bu.ders(i, a) * bv.ders(j, b) * p;
    }
  }
  SurfaceJet out;
  out.position = acc[0][0];
  out.du = acc[1][0];
  out.dv = acc[0][1];
  out.duu = acc[2][0];
  out.duv = acc[1][1];
  out.dvv = acc[0][2];
  out.duuu = acc[3][0];
  out.duuv = acc[2][1];
  out.duvv = acc[1][2];
  out.dvvv = acc[0][3];
  return out;
}

void BSplineSurface::transform(double scale, const Vec3& offset) {
  for (auto& p : control_points) p = p * scale + offset;
}

Vec3 unit_normal(const SurfaceJet& jet) {
  const Vec3 n = jet.du.cross(jet.dv);
  const double len = n.norm();
  if (len < kDegenerateNormalTol)
    throw SingularityError("degenerate tangent plane: |S_u x S_v| < 1e-12");
  return n / len;
}

NormalCurvature normal_curvature_from_jet(const SurfaceJet& jet, const Vec2& direction) {
  if (direction.norm() == 0.0)
    throw std::invalid_argument("normal curvature: zero direction");
  const Vec3 n = unit_normal(jet);
  const double E = jet.du.dot(jet.du);
  const double F = jet.du.dot(jet.dv);
  const double G = jet.dv.dot(jet.dv);
  const double L = jet.duu.dot(n);
  const double M = jet.duv.dot(n);
  const double N = jet.dvv.dot(n);
  const double a = direction.x(), b = direction.y();
  const double one = E * a * a + 2.0 * F * a * b + G * b * b;
  const double two = L * a * a + 2.0 * M * a * b + N * b * b;
  return {n, two / one};
}

NormalCurvature surface_normal_and_curvature(const BSplineSurface& surface, double u, double v,
                                             const Vec2& direction) {
  return normal_curvature_from_jet(surface.jet(u, v), direction);
}

double mean_curvature(const SurfaceJet& jet) {
  const Vec3 n = unit_normal(jet);
  const double E = jet.du.dot(jet.du);
  const double F = jet.du.dot(jet.dv);
  const double G = jet.dv.dot(jet.dv);
  const double L = jet.duu.dot(n);
  const double M = jet.duv.dot(n);
  const double N = jet.dvv.dot(n);
  return (E * N - 2.0 * F * M + G * L) / (2.0 * (E * G - F * F));
}

}  // namespace holefill::geom
