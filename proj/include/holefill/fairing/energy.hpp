#pragma once

#include <optional>
#include <string>
#include <vector>

#include "holefill/geom/bspline_surface.hpp"
#include "holefill/param/hole_boundary.hpp"

namespace holefill::fairing {

// Degrees + knots of the filling surface (the control grid shape follows
// from the knot vectors).
struct SurfaceLayout {
  geom::KnotVector knots_u, knots_v;

  int count_u() const { return knots_u.control_count(); }
  int count_v() const { return knots_v.control_count(); }
  int control_count() const { return count_u() * count_v(); }
};

struct EnergyWeights {
  double position = 1e4;
  double normal = 1e2;
  double curvature = 1.0;

  bool all_zero() const { return position == 0.0 && normal == 0.0 && curvature == 0.0; }
  bool coupled() const { return normal > 0.0 || curvature > 0.0; }
};

struct Tolerances {
  double position = 1e-6;
  double normal = 1e-3;  // radians between unit normals
  double curvature = 1e-1;
};

// One integrand term: weight * (d^{du+dv} S / du^a dv^b)^2.
struct JetTerm {
  int du, dv;
  double weight;
};

// Squared-derivative expansion of the bending and rate-of-change-of-
// bending energies (1,2,1 on second order; 1,3,3,1 on third order).
std::vector<JetTerm> bending_terms();

// Per-sample constraint targets along the trimming curve.
struct ContinuityTargets {
  std::vector<Vec3> positions;
  std::vector<Vec3> normals;        // empty when the boundary has none
  std::vector<double> curvatures;   // normal curvature along cross_dirs
  std::vector<Vec2> cross_dirs;     // unit cross-boundary parametric directions
  std::vector<double> metric_scale; // frozen I(d,d) estimate per sample

  int size() const { return static_cast<int>(positions.size()); }
  bool has_normals() const { return !normals.empty(); }
  bool has_curvatures() const { return !curvatures.empty(); }
};

// Builds targets from boundary samples/attributes and the trimming
// curve. Cross-boundary directions are the 90-degree rotation of the
// pcurve tangent; the first-fundamental-form scale is frozen from the
// projection surface when given, otherwise estimated isotropically from
// boundary/pcurve arc-length ratios.
ContinuityTargets make_targets(const param::HoleBoundary& boundary, const param::PCurve& pcurve,
                               const geom::BSplineSurface* projection_surface = nullptr);

// Assembled quadratic energy: fairness acts per coordinate; constraints
// couple coordinates whenever normal or curvature weights are active.
struct EnergySystem {
  Eigen::MatrixXd fairness;     // K x K, per coordinate
  Eigen::MatrixXd constraints;  // K x K (per coordinate) or 3K x 3K (coupled)
  Eigen::MatrixXd rhs;          // K x 3 or 3K x 1
  double constant = 0.0;
  bool coupled = false;
  bool constraint_free = false;
  EnergyWeights weights;
  int quadrature_order = 4;
  std::vector<JetTerm> terms = bending_terms();
};

// Row-major control-grid flattening: (i, j) -> i * cols + j.
int flatten_index(int i, int j, int rows, int cols);

// Fairness matrix by span-wise Gauss-Legendre quadrature of the
// squared-derivative terms. Orders below the exactness requirement for
// the layout's degree emit a warning on stderr but proceed.
Eigen::MatrixXd assemble_fairness(const SurfaceLayout& layout, int quadrature_order = 4,
                                  const std::vector<JetTerm>& terms = bending_terms());

// Constraint matrix/vector/constant from position, tangent-plane and
// cross-curvature penalties along the pcurve (closed-loop trapezoidal
// weights in t).
void assemble_constraints(const SurfaceLayout& layout, const param::PCurve& pcurve,
                          const ContinuityTargets& targets, const EnergyWeights& weights,
                          EnergySystem& system);

// Full assembly convenience.
EnergySystem assemble_system(const SurfaceLayout& layout, const param::PCurve& pcurve,
                             const ContinuityTargets& targets, const EnergyWeights& weights,
                             int quadrature_order = 4);

struct SolveInfo {
  double epsilon = 0.0;  // Tikhonov shift that produced the solution
  bool success = false;
};

// Minimizes cp'(A+D)cp - 2 b.cp by a symmetric indefinite factorization,
// escalating a Tikhonov shift (0, 1e-12, 1e-10, 1e-8) only on failure.
// Returns the K x 3 control-point matrix; throws std::runtime_error when
// the largest shift still fails.
Eigen::MatrixXd solve_filling(const EnergySystem& system, SolveInfo* info = nullptr);

// Scalar energy of a candidate control grid, evaluated through the
// integrand/residual definitions rather than the assembled matrices.
double direct_energy(const SurfaceLayout& layout, const std::vector<Vec3>& control_points,
                     const param::PCurve& pcurve, const ContinuityTargets& targets,
                     const EnergyWeights& weights, int quadrature_order = 4);

// Fairness-only quadratic form sum over coordinates.
double fairness_energy(const Eigen::MatrixXd& A, const std::vector<Vec3>& control_points);

struct BoundaryErrors {
  double g0 = 0.0, g1 = 0.0, g2 = 0.0;
  bool pass_g0 = false, pass_g1 = false, pass_g2 = false;
};

// Max position / normal-angle / curvature deviations along the pcurve
// and the per-level tolerance verdicts.
BoundaryErrors boundary_error_and_str(const geom::BSplineSurface& filled,
                                      const param::PCurve& pcurve,
                                      const ContinuityTargets& targets, const Tolerances& tol);

// Dense text dump (row-major, scientific, 17 significant digits) for
// cross-implementation diffing.
void dump_energy_system(const EnergySystem& system, const std::string& path);

}  // namespace holefill::fairing
