#pragma once

#include "holefill/param/hole_boundary.hpp"

namespace holefill::param {

// Mean L2 discrepancy between two pcurves of equal length, minimized
// over cyclic start-index shifts. Throws std::invalid_argument on a
// length mismatch.
double parameter_error(const PCurve& predicted, const PCurve& ground_truth,
                       int* best_shift = nullptr);

}  // namespace holefill::param
