#include "holefill/geom/knot_vector.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace holefill::geom {

void KnotVector::validate() const {
  if (degree < 1) throw std::invalid_argument("knot vector: degree must be >= 1");
  const int n = control_count();
  if (n < degree + 1)
    throw std::invalid_argument("knot vector: too few knots for degree");
  for (size_t i = 0; i + 1 < values.size(); ++i)
    if (values[i] > values[i + 1])
      throw std::invalid_argument("knot vector: knots must be nondecreasing");
  for (int i = 0; i <= degree; ++i) {
    if (values[i] != 0.0)
      throw std::invalid_argument("knot vector: first degree+1 knots must equal 0");
    if (values[values.size() - 1 - i] != 1.0)
      throw std::invalid_argument("knot vector: last degree+1 knots must equal 1");
  }
}

int KnotVector::find_span(double u) const {
  const int p = degree;
  const int n = control_count();
  if (u < values.front() || u > values.back()) {
    std::ostringstream os;
    os << "parameter " << u << " outside knot range [" << values.front() << ", "
       << values.back() << "]";
    throw std::domain_error(os.str());
  }
  if (u >= values[n]) return n - 1;  // closed right end
  if (u <= values[p]) return p;
  int low = p, high = n;
  int mid = (low + high) / 2;
  while (u < values[mid] || u >= values[mid + 1]) {
    if (u < values[mid])
      high = mid;
    else
      low = mid;
    mid = (low + high) / 2;
  }
  return mid;
}

std::vector<double> KnotVector::interior() const {
  return {values.begin() + degree + 1, values.end() - degree - 1};
}

std::vector<double> KnotVector::greville() const {
  std::vector<double> g(control_count());
  for (int i = 0; i < control_count(); ++i) {
    double s = 0.0;
    for (int k = 1; k <= degree; ++k) s += values[i + k];
    g[i] = s / degree;
  }
  return g;
}

KnotVector KnotVector::clamped_uniform(int control_count, int degree) {
  const int interior = control_count - degree - 1;
  std::vector<double> in(interior);
  for (int i = 0; i < interior; ++i) in[i] = double(i + 1) / (interior + 1);
  return from_interior(in, control_count, degree);
}

KnotVector KnotVector::from_interior(const std::vector<double>& interior, int control_count,
                                     int degree) {
  if (static_cast<int>(interior.size()) != control_count - degree - 1)
    throw std::invalid_argument("knot vector: interior knot count mismatch");
  KnotVector kv;
  kv.degree = degree;
  kv.values.assign(degree + 1, 0.0);
  kv.values.insert(kv.values.end(), interior.begin(), interior.end());
  kv.values.insert(kv.values.end(), degree + 1, 1.0);
  kv.validate();
  return kv;
}

BasisWindow basis_functions(const KnotVector& kv, double u, int order) {
  const int p = kv.degree;
  const auto& U = kv.values;
  const int span = kv.find_span(u);
  const int nd = std::min(order, p);  // derivatives beyond the degree vanish

  // Basis triangle with knot differences kept for the derivative pass.
  Eigen::MatrixXd ndu(p + 1, p + 1);
  std::vector<double> left(p + 1), right(p + 1);
  ndu(0, 0) = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = u - U[span + 1 - j];
    right[j] = U[span + j] - u;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu(j, r) = right[r + 1] + left[j - r];
      const double temp = ndu(r, j - 1) / ndu(j, r);
      ndu(r, j) = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu(j, j) = saved;
  }

  Eigen::MatrixXd ders = Eigen::MatrixXd::Zero(order + 1, p + 1);
  for (int j = 0; j <= p; ++j) ders(0, j) = ndu(j, p);

  std::vector<std::vector<double>> a(2, std::vector<double>(p + 1, 0.0));
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a[0][0] = 1.0;
    for (int k = 1; k <= nd; ++k) {
      double d = 0.0;
      const int rk = r - k, pk = p - k;
      if (r >= k) {
        a[s2][0] = a[s1][0] / ndu(pk + 1, rk);
        d = a[s2][0] * ndu(rk, pk);
      }
      const int j1 = (rk >= -1) ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu(pk + 1, rk + j);
        d += a[s2][j] * ndu(rk + j, pk);
      }
      if (r <= pk) {
        a[s2][k] = -a[s1][k - 1] / ndu(pk + 1, r);
        d += a[s2][k] * ndu(r, pk);
      }
      ders(k, r) = d;
      std::swap(s1, s2);
    }
  }

  double f = p;
  for (int k = 1; k <= nd; ++k) {
    for (int j = 0; j <= p; ++j) ders(k, j) *= f;
    f *= (p - k);
  }
  return {span - p, std::move(ders)};
}

std::vector<std::pair<int, double>> basis_eval(const KnotVector& kv, double u, int order) {
  const BasisWindow w = basis_functions(kv, u, order);
  std::vector<std::pair<int, double>> out;
  out.reserve(kv.degree + 1);
  for (int j = 0; j <= kv.degree; ++j) out.emplace_back(w.first + j, w.ders(order, j));
  return out;
}

}  // namespace holefill::geom
