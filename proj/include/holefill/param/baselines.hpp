#pragma once

#include "holefill/param/hole_boundary.hpp"
#include "holefill/param/plane_fit.hpp"

namespace holefill::param {

// Margin keeping baseline pcurves off the surface border.
inline constexpr double kParamMargin = 0.05;

// Nearest-plane parameterization: project each sample onto the
// least-squares plane, then map the projected bounding box onto
// [margin, 1-margin]^2 per axis.
PCurve np_pcurve(const HoleBoundary& boundary);

// Mean-value-coordinate parameterization. Anchors come from
// segment_offsets (>= 3 required) and are placed on a circle at angles
// proportional to cumulative arc length; every other sample maps to its
// mean-value-weighted combination of anchor positions. Boundaries
// without enough anchors fall back to direct arc-length-to-circle
// mapping. The result is normalized into [margin, 1-margin]^2.
PCurve mvc_pcurve(const HoleBoundary& boundary);

// Mean value weights of p with respect to the closed anchor polygon;
// non-negative and summing to one. Exposed for testing.
std::vector<double> mean_value_weights(const Vec3& p, std::span<const Vec3> anchors);

}  // namespace holefill::param
