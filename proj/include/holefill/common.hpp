#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace holefill {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat = Eigen::MatrixXd;

// Tangent plane is degenerate (|S_u x S_v| below threshold).
struct SingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input geometry is degenerate (coincident / collinear points).
struct DegeneracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Mesh connectivity is not manifold (or a face is degenerate).
struct TopologyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kDegenerateNormalTol = 1e-12;

}  // namespace holefill
