#include "holefill/data/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "holefill/fairing/energy.hpp"

namespace holefill::data {

namespace {

constexpr int kGrid = 8;
constexpr double kMinKnotGap = 0.02;
constexpr double kNormMargin = 0.05;

geom::KnotVector random_knots(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> interior(4);
  for (int tries = 0; tries < 1000; ++tries) {
    for (auto& k : interior) k = uni(rng);
    std::sort(interior.begin(), interior.end());
    bool ok = interior.front() >= kMinKnotGap && interior.back() <= 1.0 - kMinKnotGap;
    for (size_t i = 0; ok && i + 1 < interior.size(); ++i)
      ok = interior[i + 1] - interior[i] >= kMinKnotGap;
    if (ok) return geom::KnotVector::from_interior(interior, kGrid, 3);
  }
  return geom::KnotVector::clamped_uniform(kGrid, 3);
}

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec3 a(gauss(rng), gauss(rng), gauss(rng));
  Vec3 b(gauss(rng), gauss(rng), gauss(rng));
  a.normalize();
  b = (b - b.dot(a) * a).normalized();
  Eigen::Matrix3d rot;
  rot.col(0) = a;
  rot.col(1) = b;
  rot.col(2) = a.cross(b);
  return rot;
}

double bernstein3(int i, double t) {
  const double s = 1.0 - t;
  switch (i) {
    case 0: return s * s * s;
    case 1: return 3.0 * t * s * s;
    case 2: return 3.0 * t * t * s;
    default: return t * t * t;
  }
}

// Random bicubic patch evaluated anywhere in [0,1]^2.
struct RandomBicubic {
  Vec3 coeff[4][4];

  static RandomBicubic make(std::mt19937_64& rng, double amplitude) {
    std::uniform_real_distribution<double> uni(-amplitude, amplitude);
    RandomBicubic f;
    for (auto& row : f.coeff)
      for (auto& c : row) c = Vec3(uni(rng), uni(rng), uni(rng));
    return f;
  }

  Vec3 eval(double u, double v) const {
    Vec3 out = Vec3::Zero();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) out += bernstein3(i, u) * bernstein3(j, v) * coeff[i][j];
    return out;
  }
};

}  // namespace

geom::BSplineSurface generate_surface(std::uint64_t seed, SurfaceFamily family) {
  std::mt19937_64 rng(seed);
  geom::BSplineSurface s;
  s.knots_u = random_knots(rng);
  s.knots_v = random_knots(rng);
  s.control_points.resize(kGrid * kGrid);

  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const Eigen::Matrix3d rot = random_rotation(rng);

  switch (family) {
    case SurfaceFamily::kPatchSampled: {
      // Base plane plus a smooth random bicubic offset, sampled on the grid.
      const RandomBicubic bump = RandomBicubic::make(rng, 0.35);
      for (int i = 0; i < kGrid; ++i)
        for (int j = 0; j < kGrid; ++j) {
          const double x = double(i) / (kGrid - 1), y = double(j) / (kGrid - 1);
          s.cp(i, j) = rot * (Vec3(x, y, 0.0) + 0.5 * bump.eval(x, y));
        }
      break;
    }
    case SurfaceFamily::kProcedural: {
      // Random low-frequency height field over a rotated base plane.
      struct Mode {
        double au, av, pu, pv, amp;
      };
      std::vector<Mode> modes(4);
      std::uniform_real_distribution<double> freq(0.5, 2.0);
      std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
      std::uniform_real_distribution<double> amp(-0.12, 0.12);
      for (auto& m : modes) m = {freq(rng), freq(rng), phase(rng), phase(rng), amp(rng)};
      for (int i = 0; i < kGrid; ++i)
        for (int j = 0; j < kGrid; ++j) {
          const double x = double(i) / (kGrid - 1), y = double(j) / (kGrid - 1);
          double h = 0.0;
          for (const auto& m : modes)
            h += m.amp * std::sin(2.0 * M_PI * m.au * x + m.pu) *
                 std::sin(2.0 * M_PI * m.av * y + m.pv);
          s.cp(i, j) = rot * Vec3(x, y, h);
        }
      break;
    }
    case SurfaceFamily::kFolded: {
      // Sweep the u direction through an arc wider than a half turn so
      // the patch overhangs every plane fit.
      std::uniform_real_distribution<double> arc(3.6, 4.6);   // radians
      std::uniform_real_distribution<double> rad(0.35, 0.55);
      const double theta_total = arc(rng);
      const double radius = rad(rng);
      const RandomBicubic bump = RandomBicubic::make(rng, 0.05);
      for (int i = 0; i < kGrid; ++i)
        for (int j = 0; j < kGrid; ++j) {
          const double x = double(i) / (kGrid - 1), y = double(j) / (kGrid - 1);
          const double theta = theta_total * (x - 0.5);
          Vec3 p(radius * std::sin(theta), y, radius * (1.0 - std::cos(theta)));
          s.cp(i, j) = rot * (p + bump.eval(x, y));
        }
      break;
    }
  }
  s.validate();
  return s;
}

geom::BSplineSurface add_fair_noise(const geom::BSplineSurface& surface, double level,
                                    std::uint64_t seed) {
  if (level <= 0.0) return surface;
  std::mt19937_64 rng(seed);

  const fairing::SurfaceLayout layout{surface.knots_u, surface.knots_v};
  const Eigen::MatrixXd A = fairing::assemble_fairness(layout);
  const double base = fairing::fairness_energy(A, surface.control_points) + 1e-12;

  const int nu = surface.count_u(), nv = surface.count_v();
  geom::BSplineSurface best = surface;
  double best_ratio = std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt < 20; ++attempt) {
    RandomBicubic field = RandomBicubic::make(rng, 1.0);
    // Rescale the field so the peak grid displacement equals `level`.
    double peak = 0.0;
    geom::BSplineSurface candidate = surface;
    std::vector<Vec3> disp(nu * nv);
    for (int i = 0; i < nu; ++i)
      for (int j = 0; j < nv; ++j) {
        disp[i * nv + j] = field.eval(double(i) / (nu - 1), double(j) / (nv - 1));
        peak = std::max(peak, disp[i * nv + j].norm());
      }
    if (peak == 0.0) continue;
    for (int k = 0; k < nu * nv; ++k)
      candidate.control_points[k] += disp[k] * (level / peak);
    const double ratio =
        (fairing::fairness_energy(A, candidate.control_points) + 1e-12) / base;
    if (ratio < best_ratio) {
      best_ratio = ratio;
      best = candidate;
    }
    if (ratio <= 4.0) return candidate;
  }
  return best;
}

std::vector<param::PCurve> make_pcurve_library(std::uint64_t seed, int count, int samples) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<param::PCurve> library;
  library.reserve(count);

  for (int c = 0; c < count; ++c) {
    const int family = c % 3;
    std::vector<double> radius(samples, 1.0);
    switch (family) {
      case 0: {  // perturbed ellipse
        const double squash = 0.6 + 0.4 * uni(rng);
        std::vector<double> eps(3), phi(3);
        for (int k = 0; k < 3; ++k) {
          eps[k] = 0.1 * uni(rng);
          phi[k] = 2.0 * M_PI * uni(rng);
        }
        param::PCurve curve;
        curve.params.resize(samples);
        for (int i = 0; i < samples; ++i) {
          const double th = 2.0 * M_PI * i / samples;
          double r = 1.0;
          for (int k = 0; k < 3; ++k) r += eps[k] * std::cos((k + 2) * th + phi[k]);
          curve.params[i] = Vec2(r * std::cos(th), r * squash * std::sin(th));
        }
        library.push_back(std::move(curve));
        continue;
      }
      case 1: {  // rounded polygon
        const int corners = 3 + static_cast<int>(uni(rng) * 5.0);
        const double phase = 2.0 * M_PI * uni(rng);
        for (int i = 0; i < samples; ++i) {
          const double th = 2.0 * M_PI * i / samples + phase;
          const double local = std::fmod(th, 2.0 * M_PI / corners) - M_PI / corners;
          radius[i] = std::cos(M_PI / corners) / std::cos(local);
        }
        // circular moving average rounds the corners
        std::vector<double> smooth(samples);
        const int w = samples / 16;
        for (int i = 0; i < samples; ++i) {
          double acc = 0.0;
          for (int k = -w; k <= w; ++k) acc += radius[(i + k + samples) % samples];
          smooth[i] = acc / (2 * w + 1);
        }
        radius = std::move(smooth);
        break;
      }
      default: {  // star: deep concavities
        const int lobes = 3 + static_cast<int>(uni(rng) * 4.0);
        const double depth = 0.25 + 0.2 * uni(rng);
        const double phase = 2.0 * M_PI * uni(rng);
        for (int i = 0; i < samples; ++i) {
          const double th = 2.0 * M_PI * i / samples;
          radius[i] = 1.0 - depth + depth * std::cos(lobes * th + phase);
        }
        break;
      }
    }
    param::PCurve curve;
    curve.params.resize(samples);
    for (int i = 0; i < samples; ++i) {
      const double th = 2.0 * M_PI * i / samples;
      curve.params[i] = Vec2(radius[i] * std::cos(th), radius[i] * std::sin(th));
    }
    library.push_back(std::move(curve));
  }

  // Normalize every loop into [0.1, 0.9]^2 around (0.5, 0.5).
  for (auto& curve : library) {
    Vec2 lo = curve.params[0], hi = curve.params[0];
    for (const auto& p : curve.params) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const double extent = std::max(hi.x() - lo.x(), hi.y() - lo.y());
    const double s = 0.8 / extent;
    const Vec2 center = 0.5 * (lo + hi);
    for (auto& p : curve.params) {
      p = Vec2(0.5, 0.5) + (p - center) * s;
      p = p.cwiseMax(Vec2(0.1, 0.1)).cwiseMin(Vec2(0.9, 0.9));
    }
    curve.validate();
  }
  return library;
}

DatasetRecord trim_and_sample(const geom::BSplineSurface& surface,
                              const std::vector<param::PCurve>& pcurve_library,
                              std::uint64_t seed) {
  if (pcurve_library.empty())
    throw std::invalid_argument("trim_and_sample: empty pcurve library");
  std::mt19937_64 rng(seed);
  const auto& pcurve = pcurve_library[rng() % pcurve_library.size()];
  for (const auto& p : pcurve.params)
    if (p.x() < 0.0 || p.x() > 1.0 || p.y() < 0.0 || p.y() > 1.0)
      throw std::invalid_argument("trim_and_sample: pcurve leaves the parameter square");

  DatasetRecord record;
  record.seed = seed;
  record.pcurve_gt = pcurve;

  // Uniform normalization of the control hull into [margin, 1-margin]^3.
  Vec3 lo = surface.control_points[0], hi = surface.control_points[0];
  for (const auto& p : surface.control_points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double extent = (hi - lo).maxCoeff();
  if (extent <= 0.0) throw std::invalid_argument("trim_and_sample: degenerate surface");
  const double s = (1.0 - 2.0 * kNormMargin) / extent;
  Vec3 offset;
  for (int axis = 0; axis < 3; ++axis) {
    const double used = (hi[axis] - lo[axis]) * s;
    offset[axis] = kNormMargin + 0.5 * ((1.0 - 2.0 * kNormMargin) - used) - lo[axis] * s;
  }
  record.target_surface = surface;
  record.target_surface.transform(s, offset);
  record.norm_scale = s;
  record.norm_offset = offset;

  const int n = pcurve.size();
  auto& b = record.boundary;
  b.samples.resize(n);
  b.normals.resize(n);
  b.curvatures.resize(n);
  b.segment_offsets = {0};
  for (int k = 0; k < n; ++k) {
    const Vec2& uv = pcurve.params[k];
    const geom::SurfaceJet jet = record.target_surface.jet(uv.x(), uv.y());
    b.samples[k] = jet.position;
    b.normals[k] = geom::unit_normal(jet);
    const Vec2 dp = pcurve.params[(k + 1) % n] - pcurve.params[(k + n - 1) % n];
    const Vec2 tangent = dp.normalized();
    const Vec2 cross_dir(-tangent.y(), tangent.x());
    b.curvatures[k] = geom::normal_curvature_from_jet(jet, cross_dir).kappa;
  }
  b.validate();

  record.labels =
      voxel::encode_refinement(record.target_surface.control_points, 0.1, 0.01);
  record.knots_u_interior = record.target_surface.knots_u.interior();
  record.knots_v_interior = record.target_surface.knots_v.interior();
  return record;
}

std::pair<std::vector<DatasetRecord>, std::vector<DatasetRecord>> split(
    const std::vector<DatasetRecord>& records, double ratio, std::uint64_t seed) {
  if (records.size() < 10) throw std::invalid_argument("split: need at least 10 records");

  std::vector<std::uint64_t> ids;
  for (const auto& r : records)
    if (std::find(ids.begin(), ids.end(), r.surface_id) == ids.end())
      ids.push_back(r.surface_id);
  std::sort(ids.begin(), ids.end());
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);

  const size_t train_count = static_cast<size_t>(std::floor(ratio * ids.size()));
  std::vector<std::uint64_t> train_ids(ids.begin(), ids.begin() + train_count);

  std::pair<std::vector<DatasetRecord>, std::vector<DatasetRecord>> out;
  for (const auto& r : records) {
    if (std::find(train_ids.begin(), train_ids.end(), r.surface_id) != train_ids.end())
      out.first.push_back(r);
    else
      out.second.push_back(r);
  }
  return out;
}

std::vector<DatasetRecord> build_corpus(const CorpusOptions& options) {
  std::mt19937_64 rng(options.seed);
  const auto library = make_pcurve_library(options.seed * 7919 + 13, 50,
                                           options.boundary_samples);
  std::vector<param::PCurve> star_only;
  for (size_t i = 2; i < library.size(); i += 3) star_only.push_back(library[i]);

  std::vector<DatasetRecord> records;
  records.reserve(size_t(options.surfaces) * options.pcurves_per_surface);
  const double noise_levels[] = {0.0, 0.25, 0.5, 1.0};
  for (int sidx = 0; sidx < options.surfaces; ++sidx) {
    const std::uint64_t surface_seed = rng();
    const SurfaceFamily family =
        options.hard_only ? SurfaceFamily::kFolded
                          : (sidx % 2 == 0 ? SurfaceFamily::kPatchSampled
                                           : SurfaceFamily::kProcedural);
    const geom::BSplineSurface base = generate_surface(surface_seed, family);
    for (int p = 0; p < options.pcurves_per_surface; ++p) {
      const std::uint64_t record_seed = rng();
      const double level = options.max_noise * noise_levels[p % 4];
      const geom::BSplineSurface noisy = add_fair_noise(base, level, record_seed);
      DatasetRecord record =
          trim_and_sample(noisy, options.hard_only ? star_only : library, record_seed);
      record.surface_id = sidx;
      record.noise_level = level;
      records.push_back(std::move(record));
    }
  }
  return records;
}

}  // namespace holefill::data
