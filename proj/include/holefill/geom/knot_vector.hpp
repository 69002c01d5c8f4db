#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "holefill/common.hpp"

namespace holefill::geom {

// Clamped knot vector on [0, 1]: the first and last knots are repeated
// degree+1 times, interior knots are nondecreasing, and
// length == control_count + degree + 1.
struct KnotVector {
  std::vector<double> values;
  int degree = 3;

  int control_count() const { return static_cast<int>(values.size()) - degree - 1; }

  // Throws std::invalid_argument if any invariant is violated.
  void validate() const;

  // Span index s with values[s] <= u < values[s+1]; the last span is
  // treated as closed so u == 1 lands in span control_count()-1.
  // Throws std::domain_error for u outside [front, back].
  int find_span(double u) const;

  // Interior knots (those strictly between the clamp blocks).
  std::vector<double> interior() const;

  // Greville abscissae g_i = (t_{i+1} + ... + t_{i+degree}) / degree.
  std::vector<double> greville() const;

  static KnotVector clamped_uniform(int control_count, int degree = 3);
  static KnotVector from_interior(const std::vector<double>& interior, int control_count,
                                  int degree = 3);
};

// Nonzero basis window at one parameter value.
// ders(k, j) = k-th derivative of N_{first+j} for j in [0, degree].
struct BasisWindow {
  int first = 0;
  Eigen::MatrixXd ders;
};

// All nonzero basis functions and derivatives through `order` at u.
BasisWindow basis_functions(const KnotVector& kv, double u, int order);

// The requested derivative order only, as (control index, value) pairs.
std::vector<std::pair<int, double>> basis_eval(const KnotVector& kv, double u, int order);

}  // namespace holefill::geom
