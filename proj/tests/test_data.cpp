#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <random>
#include <set>

#include "holefill/data/generator.hpp"
#include "holefill/fairing/energy.hpp"
#include "oracles.hpp"

using namespace holefill;

TEST_CASE("surface generation is deterministic and valid") {
  const auto a = data::generate_surface(42, data::SurfaceFamily::kProcedural);
  const auto b = data::generate_surface(42, data::SurfaceFamily::kProcedural);
  REQUIRE(a.control_points.size() == 64);
  for (int k = 0; k < 64; ++k)
    CHECK((a.control_points[k] - b.control_points[k]).norm() == 0.0);
  CHECK(a.knots_u.values == b.knots_u.values);

  // interior knots strictly increasing with the minimum gap
  for (auto family : {data::SurfaceFamily::kPatchSampled, data::SurfaceFamily::kProcedural,
                      data::SurfaceFamily::kFolded}) {
    for (std::uint64_t seed : {1ull, 7ull, 123ull}) {
      const auto s = data::generate_surface(seed, family);
      for (const auto* kv : {&s.knots_u, &s.knots_v}) {
        const auto interior = kv->interior();
        CHECK(interior.front() >= 0.02 - 1e-12);
        CHECK(interior.back() <= 0.98 + 1e-12);
        for (size_t i = 0; i + 1 < interior.size(); ++i)
          CHECK(interior[i + 1] - interior[i] >= 0.02 - 1e-12);
      }
      s.validate();
    }
  }
}

TEST_CASE("generated surfaces pass the derivative oracle") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> uni(0.05, 0.95);
  const double h = 1e-5;
  for (std::uint64_t seed : {3ull, 11ull}) {
    const auto s = data::generate_surface(seed, data::SurfaceFamily::kPatchSampled);
    for (int k = 0; k < 10; ++k) {
      const double u = uni(rng), v = uni(rng);
      const geom::SurfaceJet jet = s.jet(u, v);
      const Vec3 fd_du = (s.jet(u + h, v).position - s.jet(u - h, v).position) / (2.0 * h);
      const Vec3 fd_duu = (s.jet(u + h, v).du - s.jet(u - h, v).du) / (2.0 * h);
      CHECK(oracles::close_deriv(jet.du, fd_du));
      CHECK(oracles::close_deriv(jet.duu, fd_duu));
    }
  }
}

TEST_CASE("fair noise: zero level, bounded energy ratio, linear scaling") {
  const auto base = data::generate_surface(5, data::SurfaceFamily::kProcedural);
  const auto same = data::add_fair_noise(base, 0.0, 99);
  for (int k = 0; k < 64; ++k)
    CHECK((same.control_points[k] - base.control_points[k]).norm() == 0.0);

  const fairing::SurfaceLayout layout{base.knots_u, base.knots_v};
  const Eigen::MatrixXd A = fairing::assemble_fairness(layout);
  const double e0 = fairing::fairness_energy(A, base.control_points) + 1e-12;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto noisy = data::add_fair_noise(base, 0.02, seed);
    const double e1 = fairing::fairness_energy(A, noisy.control_points) + 1e-12;
    CHECK(e1 / e0 <= 4.0 + 1e-9);
  }

  // mean displacement scales linearly with the level
  double mean_01 = 0.0, mean_02 = 0.0, mean_04 = 0.0;
  int accepted = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto disp = [&](double level) {
      const auto noisy = data::add_fair_noise(base, level, seed + 1000);
      double sum = 0.0;
      for (int k = 0; k < 64; ++k)
        sum += (noisy.control_points[k] - base.control_points[k]).norm();
      return sum / 64.0;
    };
    mean_01 += disp(0.01);
    mean_02 += disp(0.02);
    mean_04 += disp(0.04);
    ++accepted;
  }
  mean_01 /= accepted;
  mean_02 /= accepted;
  mean_04 /= accepted;
  CHECK(mean_02 / mean_01 == doctest::Approx(2.0).epsilon(0.15));
  CHECK(mean_04 / mean_02 == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("pcurve library loops are valid, closed, inside the box") {
  const auto library = data::make_pcurve_library(17, 30);
  CHECK(library.size() == 30);
  for (const auto& curve : library) {
    CHECK(curve.size() == 128);
    curve.validate();
    for (const auto& p : curve.params) {
      CHECK(p.x() >= 0.1 - 1e-9);
      CHECK(p.x() <= 0.9 + 1e-9);
      CHECK(p.y() >= 0.1 - 1e-9);
      CHECK(p.y() <= 0.9 + 1e-9);
    }
    CHECK_FALSE(param::self_intersects(curve));
  }
}

TEST_CASE("records satisfy the zero-error construction and label bounds") {
  const auto surface = data::generate_surface(23, data::SurfaceFamily::kPatchSampled);
  const auto library = data::make_pcurve_library(29, 10);
  const auto record = data::trim_and_sample(surface, library, 31);

  // boundary is the normalized target surface along the stored pcurve
  for (int k = 0; k < record.boundary.size(); ++k) {
    const Vec2& uv = record.pcurve_gt.params[k];
    const Vec3 p = record.target_surface.evaluate(uv.x(), uv.y());
    CHECK((p - record.boundary.samples[k]).norm() < 1e-10);
  }

  // normalized control points live in [0,1) with margin
  for (const auto& p : record.target_surface.control_points) {
    CHECK(p.minCoeff() >= 0.05 - 1e-12);
    CHECK(p.maxCoeff() <= 0.95 + 1e-12);
  }

  // labels decode within the fine discretization bound of the truth
  const auto decoded = voxel::decode_refinement(record.labels);
  const double bound = std::sqrt(3.0) * 0.01 / 2.0;
  for (int k = 0; k < 64; ++k)
    CHECK((decoded[k] - record.target_surface.control_points[k]).norm() <= bound + 1e-15);

  // boundary normals are orthogonal to the surface tangent along the loop
  for (int k = 0; k < record.boundary.size(); ++k) {
    const int n = record.boundary.size();
    const Vec2& uv = record.pcurve_gt.params[k];
    const Vec2 dp = record.pcurve_gt.params[(k + 1) % n] - record.pcurve_gt.params[(k + n - 1) % n];
    const geom::SurfaceJet jet = record.target_surface.jet(uv.x(), uv.y());
    const Vec3 tangent = dp.x() * jet.du + dp.y() * jet.dv;
    CHECK(std::abs(record.boundary.normals[k].dot(tangent.normalized())) < 1e-8);
  }

  // denormalization round-trips into the generator's coordinates
  const Vec3 q = record.target_surface.control_points[13];
  const Vec3 world = record.denormalize(q);
  // the noisy surface passed in is the pre-normalization surface
  CHECK((world - surface.control_points[13]).norm() < 1e-12);
}

TEST_CASE("split is by surface identity, deterministic, and 90/10") {
  data::CorpusOptions options;
  options.surfaces = 10;
  options.pcurves_per_surface = 10;
  options.seed = 77;
  const auto records = data::build_corpus(options);
  REQUIRE(records.size() == 100);

  const auto [train, test] = data::split(records, 0.9, 5);
  CHECK(train.size() == 90);
  CHECK(test.size() == 10);
  std::set<std::uint64_t> train_ids, test_ids;
  for (const auto& r : train) train_ids.insert(r.surface_id);
  for (const auto& r : test) test_ids.insert(r.surface_id);
  CHECK(train_ids.size() == 9);
  CHECK(test_ids.size() == 1);
  for (auto id : test_ids) CHECK(train_ids.count(id) == 0);

  const auto [train2, test2] = data::split(records, 0.9, 5);
  CHECK(train2.size() == train.size());
  for (size_t k = 0; k < train.size(); ++k) CHECK(train2[k].seed == train[k].seed);
}

TEST_CASE("dataset NDJSON round trip preserves the construction invariant") {
  data::CorpusOptions options;
  options.surfaces = 3;
  options.pcurves_per_surface = 4;
  options.seed = 123;
  const auto records = data::build_corpus(options);
  data::DatasetManifest manifest;
  manifest.corpus_seed = options.seed;
  const std::string path = "test_dataset.ndjson";
  data::save_dataset(records, manifest, path);

  data::DatasetManifest back_manifest;
  const auto back = data::load_dataset(path, &back_manifest);
  REQUIRE(back.size() == records.size());
  CHECK(back_manifest.corpus_seed == options.seed);
  for (size_t r = 0; r < back.size(); ++r) {
    for (int k = 0; k < back[r].boundary.size(); ++k) {
      const Vec2& uv = back[r].pcurve_gt.params[k];
      const Vec3 p = back[r].target_surface.evaluate(uv.x(), uv.y());
      CHECK((p - back[r].boundary.samples[k]).norm() < 1e-10);
    }
    CHECK(back[r].surface_id == records[r].surface_id);
    CHECK(back[r].labels.coarse.indices == records[r].labels.coarse.indices);
    CHECK(back[r].labels.sub == records[r].labels.sub);
  }
  std::remove(path.c_str());
  std::remove((path + ".manifest.json").c_str());
}

TEST_CASE("folded family produces overhanging patches") {
  // The u-sweep spans more than a half turn, so some surface normals on
  // opposite flanks point in opposing directions.
  const auto s = data::generate_surface(9, data::SurfaceFamily::kFolded);
  const Vec3 n_left = geom::unit_normal(s.jet(0.05, 0.5));
  const Vec3 n_right = geom::unit_normal(s.jet(0.95, 0.5));
  CHECK(n_left.dot(n_right) < 0.2);
}
