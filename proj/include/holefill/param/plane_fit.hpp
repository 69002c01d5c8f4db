#pragma once

#include <span>

#include "holefill/common.hpp"

namespace holefill::param {

// Least-squares plane with an orthonormal in-plane frame.
struct FitPlane {
  Vec3 origin;  // centroid of the fitted points
  Vec3 normal;  // unit, smallest principal direction
  Vec3 e1, e2;  // unit in-plane axes, e1 = largest principal direction

  Vec2 project(const Vec3& p) const {
    const Vec3 d = p - origin;
    return {e1.dot(d), e2.dot(d)};
  }
  double height(const Vec3& p) const { return normal.dot(p - origin); }
};

// Plane minimizing the sum of squared distances (smallest principal
// component of the centered covariance). Throws DegeneracyError for
// collinear or coincident input.
FitPlane nearest_plane(std::span<const Vec3> points);

}  // namespace holefill::param
