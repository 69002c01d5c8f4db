#include "holefill/param/plane_fit.hpp"

#include <Eigen/Eigenvalues>

namespace holefill::param {

FitPlane nearest_plane(std::span<const Vec3> points) {
  if (points.size() < 3) throw DegeneracyError("plane fit: need at least three points");

  Vec3 centroid = Vec3::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= double(points.size());

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    const Vec3 d = p - centroid;
    cov += d * d.transpose();
  }

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  const auto& vals = eig.eigenvalues();   // ascending
  const auto& vecs = eig.eigenvectors();
  if (vals(1) <= 1e-12 * std::max(vals(2), 1e-300))
    throw DegeneracyError("plane fit: points are collinear or coincident");

  FitPlane plane;
  plane.origin = centroid;
  plane.normal = vecs.col(0);
  plane.e1 = vecs.col(2);  // largest principal direction
  plane.e2 = vecs.col(1);
  // Deterministic signs: largest-magnitude component positive, and a
  // right-handed frame with e2 = normal x e1.
  auto fix_sign = [](Vec3& v) {
    int arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0) v = -v;
  };
  fix_sign(plane.normal);
  fix_sign(plane.e1);
  plane.e2 = plane.normal.cross(plane.e1);
  return plane;
}

}  // namespace holefill::param
