// semslam - semantic-assisted LiDAR odometry, loop closure and mapping
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "semslam/downsample.hpp"
#include "semslam/features.hpp"
#include "support/test_helpers.hpp"

using namespace semslam;

namespace {

SemanticPoint makePoint(const Eigen::Vector3d& pos, ClassId label, int ring) {
  SemanticPoint p;
  p.position = pos;
  p.label = label;
  p.ring = ring;
  p.range = pos.norm();
  return p;
}

/// One full circular ring of `n` points at radius `r`, height `z`.
SemanticScan circularRing(int n, double r, double z, ClassId label) {
  SemanticScan scan;
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * M_PI * i / n - M_PI + 1e-3;  // keep azimuth ordering stable
    scan.points.push_back(makePoint({r * std::cos(a), r * std::sin(a), z}, label, 0));
  }
  return scan;
}

}  // namespace

TEST_CASE("roughness on the worked examples") {
  // Symmetric neighborhood: displacements cancel.
  CHECK(roughness({2, 0, 0}, {{1, 0, 0}, {1.5, 0, 0}, {2.5, 0, 0}, {3, 0, 0}}) ==
        Catch::Approx(0.0).margin(1e-15));

  // Hand evaluation: sum = (1,0,0), n = 3, |p_i| = 1.
  CHECK(roughness({1, 0, 0}, {{1, 1, 0}, {1, -1, 0}, {2, 0, 0}}) == Catch::Approx(1.0 / 3.0));

  // Homogeneous of degree zero under uniform scaling about the origin.
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const Eigen::Vector3d p = semslam::testing::randomPoint(rng) + Eigen::Vector3d(15, 0, 0);
    std::vector<Eigen::Vector3d> nb;
    for (int j = 0; j < 6; ++j) nb.push_back(p + semslam::testing::randomPoint(rng, 0.5));
    std::vector<Eigen::Vector3d> nb10;
    for (const auto& q : nb) nb10.push_back(10.0 * q);
    CHECK(roughness(10.0 * p, nb10) == Catch::Approx(roughness(p, nb)).epsilon(1e-12));
  }

  CHECK_THROWS_AS(roughness({0, 0, 0}, {{1, 0, 0}}), std::invalid_argument);
  CHECK(roughness({1, 0, 0}, {{1, 0, 0}}) == 0.0);  // roughness >= 0, zero iff cancelling
}

TEST_CASE("a perfect circular ring yields planars but no edges") {
  const FeatureConfig cfg;
  const SemanticScan scan = circularRing(2000, 10.0, -1.0, 0);
  const FeatureSet fs = extractFeatures(scan, cfg);

  CHECK(fs.edges.empty());
  CHECK(!fs.planars.empty());
  CHECK(fs.planars.size() <= std::size_t(cfg.n_ring_parts * cfg.n_plane_per_part));
  for (const Feature& f : fs.planars) CHECK(f.roughness < cfg.alpha);
}

TEST_CASE("a 90-degree corner is selected as an edge") {
  SemanticScan scan;
  const ClassId wall = 4;
  for (int i = 12; i >= 1; --i) {
    scan.points.push_back(makePoint({5.0, -0.5 * i, 0.0}, wall, 7));
  }
  scan.points.push_back(makePoint({5.0, 0.0, 0.0}, wall, 7));  // the corner
  const std::size_t corner_index = scan.points.size() - 1;
  for (int i = 1; i <= 12; ++i) {
    const double t = 0.5 * i;
    scan.points.push_back(makePoint({5.0 + t, t, 0.0}, wall, 7));
  }

  const FeatureSet fs = extractFeatures(scan, FeatureConfig{});
  const Eigen::Vector3d corner = scan.points[corner_index].position;
  const bool found = std::any_of(fs.edges.begin(), fs.edges.end(), [&](const Feature& f) {
    return (f.position - corner).norm() < 1e-12;
  });
  CHECK(found);
  for (const Feature& f : fs.edges) CHECK(f.roughness > FeatureConfig{}.alpha);
}

TEST_CASE("empty and degenerate scans produce no features") {
  CHECK(extractFeatures(SemanticScan{}, FeatureConfig{}).empty());

  // A ring shorter than one neighborhood produces nothing.
  SemanticScan tiny = circularRing(9, 5.0, 0.0, 0);
  CHECK(extractFeatures(tiny, FeatureConfig{}).empty());
}

TEST_CASE("feature counts respect the per-part bounds") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  SemanticScan scan;
  const int n_rings = 4;
  for (int r = 0; r < n_rings; ++r) {
    for (int i = 0; i < 500; ++i) {
      Eigen::Vector3d p(u(rng), u(rng), 0.1 * r);
      if (p.head<2>().norm() < 2.0) p.head<2>() += Eigen::Vector2d(5, 5);
      scan.points.push_back(makePoint(p, ClassId(rng() % 12), r));
    }
  }
  FeatureConfig cfg;
  const FeatureSet fs = extractFeatures(scan, cfg);
  CHECK(fs.edges.size() <= std::size_t(n_rings * cfg.n_ring_parts * cfg.n_edge_per_part));
  CHECK(fs.planars.size() <= std::size_t(n_rings * cfg.n_ring_parts * cfg.n_plane_per_part));
  for (const Feature& f : fs.edges) CHECK(f.roughness > cfg.alpha);
  for (const Feature& f : fs.planars) CHECK(f.roughness < cfg.alpha);
}

TEST_CASE("occlusion boundaries are excluded from edge candidacy") {
  // Two concentric arcs with a radial gap > 1 m; the jump points would have
  // huge roughness but must not become edges.
  SemanticScan scan;
  for (int i = 0; i < 40; ++i) {
    const double a = -0.5 + 0.02 * i;
    const double r = i < 20 ? 8.0 : 12.0;
    scan.points.push_back(makePoint({r * std::cos(a), r * std::sin(a), 0.0}, 0, 0));
  }
  const FeatureSet fs = extractFeatures(scan, FeatureConfig{});
  CHECK(fs.edges.empty());
}

TEST_CASE("semantic downsampling keeps one representative per class voxel") {
  const LabelTaxonomy tax = defaultTaxonomy();
  const ClassId pole = tax.idOf("pole");
  const ClassId road = tax.idOf("road");

  SECTION("single point survives unchanged") {
    std::vector<LabeledPoint> in = {{{1.23, 4.56, -0.5}, pole}};
    const auto out = semanticDownsample(in, tax);
    REQUIRE(out.size() == 1);
    CHECK(out[0].position == in[0].position);
    CHECK(out[0].label == pole);
  }

  SECTION("two dense clusters collapse to one point per class") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.02, 0.18);   // inside one 0.2 m voxel
    std::uniform_real_distribution<double> v(0.05, 0.75);   // inside one 0.8 m voxel
    std::vector<LabeledPoint> in;
    for (int i = 0; i < 100; ++i) in.push_back({{u(rng), u(rng), u(rng)}, pole});
    for (int i = 0; i < 100; ++i) in.push_back({{v(rng), v(rng), v(rng)}, road});
    const auto out = semanticDownsample(in, tax);
    REQUIRE(out.size() == 2);
    CHECK(out[0].label != out[1].label);
  }

  SECTION("colocated classes never merge") {
    std::vector<LabeledPoint> in = {{{0.1, 0.1, 0.1}, pole}, {{0.1, 0.1, 0.1}, road}};
    CHECK(semanticDownsample(in, tax).size() == 2);
  }
}

TEST_CASE("semantic downsampling is idempotent, shrinking and label-preserving") {
  const LabelTaxonomy tax = defaultTaxonomy();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::vector<LabeledPoint> in;
  for (int i = 0; i < 3000; ++i) {
    in.push_back({{u(rng), u(rng), u(rng)}, ClassId(rng() % tax.size())});
  }

  const auto once = semanticDownsample(in, tax);
  CHECK(once.size() <= in.size());

  const auto twice = semanticDownsample(once, tax);
  REQUIRE(twice.size() == once.size());
  for (std::size_t i = 0; i < once.size(); ++i) {
    CHECK(twice[i].position == once[i].position);
    CHECK(twice[i].label == once[i].label);
  }

  // Every survivor is an input point, label and coordinates untouched.
  for (const LabeledPoint& p : once) {
    const bool present = std::any_of(in.begin(), in.end(), [&](const LabeledPoint& q) {
      return q.label == p.label && q.position == p.position;
    });
    CHECK(present);
  }

  // Input order is irrelevant.
  std::shuffle(in.begin(), in.end(), rng);
  const auto shuffled = semanticDownsample(in, tax);
  REQUIRE(shuffled.size() == once.size());
  for (std::size_t i = 0; i < once.size(); ++i) {
    CHECK(shuffled[i].position == once[i].position);
    CHECK(shuffled[i].label == once[i].label);
  }
}
