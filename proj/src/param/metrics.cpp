#include "holefill/param/metrics.hpp"

#include <cmath>
#include <limits>

namespace holefill::param {

double parameter_error(const PCurve& predicted, const PCurve& ground_truth, int* best_shift) {
  const int n = predicted.size();
  if (n != ground_truth.size())
    throw std::invalid_argument("parameter_error: pcurve sample counts differ");

  double best = std::numeric_limits<double>::infinity();
  int arg = 0;
  for (int shift = 0; shift < n; ++shift) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
      sum += (predicted.params[(i + shift) % n] - ground_truth.params[i]).norm();
    const double mean = sum / n;
    if (mean < best) {
      best = mean;
      arg = shift;
    }
  }
  if (best_shift) *best_shift = arg;
  return best;
}

}  // namespace holefill::param
