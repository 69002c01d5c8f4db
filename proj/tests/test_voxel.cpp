#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "holefill/voxel/codec.hpp"

using namespace holefill;

TEST_CASE("first and last bins") {
  const std::vector<Vec3> pts = {{0.05, 0.05, 0.05}, {0.999, 0.999, 0.999}};
  const auto labels = voxel::encode(pts, 0.1);
  CHECK(labels.indices[0] == std::array<int, 3>{0, 0, 0});
  CHECK(labels.indices[1] == std::array<int, 3>{9, 9, 9});
}

TEST_CASE("coordinates exactly at one clamp into the last bin") {
  const std::vector<Vec3> pts = {{1.0, 0.0, 0.5}};
  const auto labels = voxel::encode(pts, 0.1);
  CHECK(labels.indices[0] == std::array<int, 3>{9, 0, 5});
}

TEST_CASE("out-of-range coordinates are rejected") {
  CHECK_THROWS_AS(voxel::encode(std::vector<Vec3>{{-0.01, 0.5, 0.5}}, 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(voxel::encode(std::vector<Vec3>{{0.5, 1.01, 0.5}}, 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(voxel::encode(std::vector<Vec3>{{0.5, 0.5, 0.5}}, 0.3),
                  std::invalid_argument);  // 1/0.3 not an integer
}

TEST_CASE("random indices match the direct floor formula") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<Vec3> pts(1000);
  for (auto& p : pts) p = Vec3(uni(rng), uni(rng), uni(rng));
  const auto labels = voxel::encode(pts, 0.01);
  for (size_t k = 0; k < pts.size(); ++k)
    for (int axis = 0; axis < 3; ++axis)
      CHECK(labels.indices[k][axis] == static_cast<int>(std::floor(100.0 * pts[k][axis])));
}

TEST_CASE("decode places points at bin centers") {
  voxel::VoxelLabelSet labels;
  labels.resolution = 0.1;
  labels.indices = {{0, 0, 0}, {9, 4, 2}};
  const auto pts = voxel::decode(labels);
  CHECK((pts[0] - Vec3(0.05, 0.05, 0.05)).norm() == doctest::Approx(0.0));
  CHECK((pts[1] - Vec3(0.95, 0.45, 0.25)).norm() == doctest::Approx(0.0));
}

TEST_CASE("round-trip error obeys the per-axis and Euclidean bounds") {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double dv = 0.1;
  const double bound = std::sqrt(3.0) * dv / 2.0;
  std::vector<Vec3> pts(10000);
  for (auto& p : pts) p = Vec3(uni(rng), uni(rng), uni(rng));
  const auto back = voxel::decode(voxel::encode(pts, dv));
  for (size_t k = 0; k < pts.size(); ++k) {
    for (int axis = 0; axis < 3; ++axis)
      CHECK(std::abs(back[k][axis] - pts[k][axis]) <= dv / 2.0 + 1e-15);
    CHECK((back[k] - pts[k]).norm() <= bound + 1e-15);
  }
}

TEST_CASE("encode is idempotent after a decode round trip") {
  std::mt19937_64 rng(107);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<Vec3> pts(500);
  for (auto& p : pts) p = Vec3(uni(rng), uni(rng), uni(rng));
  const auto once = voxel::encode(pts, 0.01);
  const auto twice = voxel::encode(voxel::decode(once), 0.01);
  CHECK(once.indices == twice.indices);
}

TEST_CASE("refinement decomposition: hand case and exact composition") {
  const std::vector<Vec3> pts = {{0.234, 0.234, 0.234}};
  const auto ref = voxel::encode_refinement(pts, 0.1, 0.01);
  CHECK(ref.coarse.indices[0][0] == 2);
  CHECK(ref.sub[0][0] == 3);
  CHECK(ref.factor == 10);

  std::mt19937_64 rng(109);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<Vec3> many(10000);
  for (auto& p : many) p = Vec3(uni(rng), uni(rng), uni(rng));
  const auto refm = voxel::encode_refinement(many, 0.1, 0.01);
  const auto fine = voxel::encode(many, 0.01);
  for (size_t k = 0; k < many.size(); ++k) {
    for (int axis = 0; axis < 3; ++axis) {
      CHECK(refm.sub[k][axis] >= 0);
      CHECK(refm.sub[k][axis] < 10);
      // composed index equals the directly computed fine index, exactly
      CHECK(refm.coarse.indices[k][axis] * refm.factor + refm.sub[k][axis] ==
            fine.indices[k][axis]);
    }
  }
  const auto composed = voxel::decode_refinement(refm);
  const auto direct = voxel::decode(fine);
  for (size_t k = 0; k < many.size(); ++k) {
    CHECK((composed[k] - direct[k]).norm() == 0.0);
    CHECK((composed[k] - many[k]).cwiseAbs().maxCoeff() <= 0.005 + 1e-15);
  }
}

TEST_CASE("non-integer refinement ratio is a configuration error") {
  CHECK_THROWS_AS(voxel::encode_refinement(std::vector<Vec3>{{0.5, 0.5, 0.5}}, 0.1, 0.04),
                  std::invalid_argument);
}

TEST_CASE("flattening utility is the documented row-major collapse") {
  CHECK(voxel::flatten_3d({0, 0, 0}, 10) == 0);
  CHECK(voxel::flatten_3d({1, 2, 3}, 10) == 123);
  CHECK(voxel::flatten_3d({9, 9, 9}, 10) == 999);
}
