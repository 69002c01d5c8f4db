#pragma once

#include <random>

#include "holefill/data/record.hpp"

namespace holefill::data {

enum class SurfaceFamily {
  kPatchSampled,  // 8x8 grid sampled from a random smooth bicubic patch
  kProcedural,    // smooth random height field over a random base plane
  kFolded,        // C-shaped overhang sweep, the hard case for plane projection
};

// Random 8x8 cubic clamped surface with interior knots drawn uniformly
// (sorted, minimum gap 0.02). Deterministic in the seed.
geom::BSplineSurface generate_surface(std::uint64_t seed, SurfaceFamily family);

// Smooth low-frequency control-point perturbation with peak amplitude
// `level`; candidates that raise the bending energy by more than 4x are
// resampled (up to 20 tries, then the best candidate is returned).
geom::BSplineSurface add_fair_noise(const geom::BSplineSurface& surface, double level,
                                    std::uint64_t seed);

// Closed procedural trimming loops inside [0.1, 0.9]^2: perturbed
// ellipses, rounded polygons and star shapes, n samples each.
std::vector<param::PCurve> make_pcurve_library(std::uint64_t seed, int count, int samples = 128);

// Evaluates the surface along a library pcurve, attaches normal and
// cross-boundary curvature attributes, normalizes everything into
// [0,1)^3 and encodes refinement labels.
DatasetRecord trim_and_sample(const geom::BSplineSurface& surface,
                              const std::vector<param::PCurve>& pcurve_library,
                              std::uint64_t seed);

// Split by surface identity: no surface id appears on both sides.
std::pair<std::vector<DatasetRecord>, std::vector<DatasetRecord>> split(
    const std::vector<DatasetRecord>& records, double ratio, std::uint64_t seed);

struct CorpusOptions {
  int surfaces = 50;
  int pcurves_per_surface = 4;
  std::uint64_t seed = 1;
  bool hard_only = false;  // folded family + star loops only
  double max_noise = 0.04;
  int boundary_samples = 128;
};

std::vector<DatasetRecord> build_corpus(const CorpusOptions& options);

}  // namespace holefill::data
