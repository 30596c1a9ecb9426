// semslam - semantic-assisted LiDAR odometry, loop closure and mapping
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "semslam/map_builder.hpp"
#include "semslam/metrics.hpp"
#include "semslam/pose_graph.hpp"
#include "support/loop_fixtures.hpp"
#include "support/test_helpers.hpp"

using namespace semslam;
using semslam::testing::noisePose;
using semslam::testing::randomPose;
using semslam::testing::squareLoopPoses;

namespace {

Pose translate(double x, double y, double z) {
  Pose p;
  p.translation = Eigen::Vector3d(x, y, z);
  return p;
}

}  // namespace

TEST_CASE("edge error on the worked examples") {
  CHECK(edgeError(Pose::identity(), Pose::identity(), Pose::identity()).norm() < 1e-15);
  CHECK(edgeError(Pose::identity(), translate(1, 0, 0), translate(1, 0, 0)).norm() < 1e-15);

  const Twist e = edgeError(Pose::identity(), translate(2, 0, 0), translate(1, 0, 0));
  CHECK(e.head<3>().norm() < 1e-15);
  CHECK(e.tail<3>().norm() == Catch::Approx(1.0));
}

TEST_CASE("edge error vanishes on the true relative pose") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const Pose a = randomPose(rng), b = randomPose(rng);
    CHECK(edgeError(a, b, a.inverse() * b).norm() < 1e-9);
  }
}

TEST_CASE("a consistent odometry chain is exactly determined") {
  std::mt19937_64 rng(5);
  std::vector<Pose> measurements;
  for (int i = 0; i < 10; ++i) measurements.push_back(randomPose(rng, 0.4, 1.0));

  std::vector<Pose> chained{Pose::identity()};
  for (const Pose& z : measurements) chained.push_back(chained.back() * z);

  SECTION("zero-residual graph is left unchanged") {
    PoseGraph graph;
    for (const Pose& p : chained) graph.addNode(p);
    for (int i = 0; i < 10; ++i) graph.addEdge(i, i + 1, measurements[i]);
    CHECK(graph.chi2() < 1e-18);

    const auto stats = graph.optimize();
    CHECK(stats.chi2_final < 1e-18);
    for (std::size_t i = 0; i < chained.size(); ++i) {
      CHECK((graph.node(int(i)).translation - chained[i].translation).norm() < 1e-9);
      CHECK((graph.node(int(i)).rotation - chained[i].rotation).norm() < 1e-9);
    }
  }

  SECTION("perturbed initialization returns to the chained measurements") {
    PoseGraph graph;
    graph.addNode(Pose::identity());
    for (std::size_t i = 1; i < chained.size(); ++i) {
      graph.addNode(chained[i] * noisePose(rng, 0.3, 5.0));
    }
    for (int i = 0; i < 10; ++i) graph.addEdge(i, i + 1, measurements[i]);

    const auto stats = graph.optimize();
    CHECK(stats.chi2_final < 1e-16);
    for (std::size_t i = 0; i < chained.size(); ++i) {
      CHECK((graph.node(int(i)).translation - chained[i].translation).norm() < 1e-6);
    }
  }
}

TEST_CASE("noiseless loop optimizes to numerical zero from a perturbed start") {
  const auto gt = squareLoopPoses(10.0, 1);  // 4 corner poses
  std::mt19937_64 rng(7);

  PoseGraph graph;
  graph.addNode(Pose::identity());
  for (std::size_t i = 1; i < gt.size(); ++i) {
    graph.addNode(gt[i] * noisePose(rng, 0.2, 3.0));
  }
  for (std::size_t i = 0; i + 1 < gt.size(); ++i) {
    graph.addEdge(int(i), int(i + 1), gt[i].inverse() * gt[i + 1]);
  }
  // The exact closing edge back to the anchor.
  graph.addEdge(int(gt.size()) - 1, 0, gt.back().inverse() * gt.front());

  const auto stats = graph.optimize(100, 1e-12);
  CHECK(stats.chi2_final < 1e-10);

  // The gauge node is untouched, bit for bit.
  CHECK(graph.node(0).rotation == Eigen::Matrix3d::Identity());
  CHECK(graph.node(0).translation == Eigen::Vector3d::Zero());

  // chi^2 never increases across accepted steps.
  for (std::size_t i = 1; i < stats.chi2_accepted.size(); ++i) {
    CHECK(stats.chi2_accepted[i] <= stats.chi2_accepted[i - 1] + 1e-18);
  }
}

TEST_CASE("loop closure halves the trajectory error on a noisy square") {
  // 40 poses around a 100 m square, per-step noise (0.02 m, 0.2 deg) with
  // the rotation noise in yaw, as wheeled odometry drifts. One exact loop
  // edge closes the ring. A closure cannot beat the Brownian-bridge floor
  // of pure translation noise, so the halving is asserted on the ensemble
  // mean; every individual seed must still improve.
  double sum_before = 0.0, sum_after = 0.0;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    std::mt19937_64 rng(seed);
    const auto gt = squareLoopPoses(100.0, 10);

    std::vector<Pose> noisy{gt.front()};
    std::vector<Pose> measurements;
    std::normal_distribution<double> nt(0.0, 0.02), nr(0.0, 0.2 * M_PI / 180.0);
    for (std::size_t i = 0; i + 1 < gt.size(); ++i) {
      Twist xi = Twist::Zero();
      xi(2) = nr(rng);
      xi.tail<3>() = Eigen::Vector3d(nt(rng), nt(rng), 0.1 * nt(rng));
      const Pose z = (gt[i].inverse() * gt[i + 1]) * se3Exp(xi);
      measurements.push_back(z);
      noisy.push_back(noisy.back() * z);
    }

    PoseGraph graph;
    for (const Pose& p : noisy) graph.addNode(p);
    for (std::size_t i = 0; i < measurements.size(); ++i) {
      graph.addEdge(int(i), int(i + 1), measurements[i]);
    }
    // One ground-truth loop edge from the last pose back to the start.
    graph.addEdge(int(gt.size()) - 1, 0, gt.back().inverse() * gt.front());

    const double ate_before = ate(noisy, gt);
    graph.optimize(100, 1e-10);
    const double ate_after = ate(graph.nodes(), gt);

    INFO("seed " << seed << ": ATE " << ate_before << " -> " << ate_after);
    CHECK(ate_after < ate_before);
    sum_before += ate_before;
    sum_after += ate_after;
  }
  CHECK(sum_after <= 0.5 * sum_before);
}

TEST_CASE("disconnected nodes are reported by index") {
  PoseGraph graph;
  graph.addNode(Pose::identity());
  graph.addNode(translate(1, 0, 0));
  graph.addNode(translate(2, 0, 0));  // never connected
  graph.addNode(translate(3, 0, 0));  // never connected
  graph.addEdge(0, 1, translate(1, 0, 0));

  CHECK_THROWS_WITH(graph.optimize(), Catch::Matchers::ContainsSubstring("2") &&
                                          Catch::Matchers::ContainsSubstring("3"));
}

TEST_CASE("edge construction validates node references") {
  PoseGraph graph;
  graph.addNode(Pose::identity());
  CHECK_THROWS_AS(graph.addEdge(0, 1, Pose::identity()), std::invalid_argument);
  CHECK_THROWS_AS(graph.addEdge(0, 0, Pose::identity()), std::invalid_argument);
}

TEST_CASE("g2o export lists vertices and edges in the expected format") {
  PoseGraph graph;
  graph.addNode(Pose::identity());
  graph.addNode(translate(1, 2, 3));
  graph.addEdge(0, 1, translate(1, 2, 3), 2.0);

  std::stringstream ss;
  graph.exportG2o(ss);

  std::string line;
  std::getline(ss, line);
  CHECK(line == "VERTEX_SE3:QUAT 0 0 0 0 0 0 0 1");
  std::getline(ss, line);
  CHECK(line == "VERTEX_SE3:QUAT 1 1 2 3 0 0 0 1");
  std::getline(ss, line);
  std::istringstream es(line);
  std::string tag;
  es >> tag;
  CHECK(tag == "EDGE_SE3:QUAT");
  int i, j;
  es >> i >> j;
  CHECK((i == 0 && j == 1));
  std::vector<double> values;
  double v;
  while (es >> v) values.push_back(v);
  REQUIRE(values.size() == 7 + 21);  // measurement + upper-triangular information
  CHECK(values[7] == 2.0);           // info(0,0) carries the edge weight
}

TEST_CASE("map rebuilding merges scans consistently") {
  const LabelTaxonomy tax = defaultTaxonomy();
  const ClassId pole = tax.idOf("pole");

  SECTION("a single scan at identity is the map itself") {
    std::vector<LabeledPoint> cloud;
    for (int i = 0; i < 10; ++i) cloud.push_back({{double(i), 0.0, 1.0}, pole});
    const auto map = rebuildMap({Pose::identity()}, {cloud}, tax);
    REQUIRE(map.size() == cloud.size());  // points 1 m apart survive 0.2 m voxels
    for (const auto& p : map) CHECK(p.label == pole);
  }

  SECTION("two scans with a known relative pose overlap tightly") {
    // One pole cluster seen from two poses. With correct poses the merged
    // cluster stays voxel-tight; with a wrong second pose it splits.
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    const Eigen::Vector3d center(5.0, 2.0, 1.0);

    Pose second = translate(2.0, -1.0, 0.0);
    std::vector<LabeledPoint> scan_a, scan_b;
    for (int i = 0; i < 60; ++i) {
      const Eigen::Vector3d world = center + Eigen::Vector3d(u(rng), u(rng), 10 * u(rng));
      scan_a.push_back({world, pole});
      scan_b.push_back({second.inverse() * world, pole});
    }

    const auto good = rebuildMap({Pose::identity(), second}, {scan_a, scan_b}, tax);
    Eigen::Vector3d mean_good = Eigen::Vector3d::Zero();
    for (const auto& p : good) mean_good += p.position;
    mean_good /= double(good.size());
    double rms = 0.0;
    for (const auto& p : good) rms += (p.position - mean_good).head<2>().squaredNorm();
    rms = std::sqrt(rms / double(good.size()));
    CHECK(rms < tax.spec(pole).voxel_size);

    const auto bad =
        rebuildMap({Pose::identity(), second * translate(1.5, 0, 0)}, {scan_a, scan_b}, tax);
    // The misplaced variant splits the cluster: its horizontal spread grows.
    Eigen::Vector3d mean_bad = Eigen::Vector3d::Zero();
    for (const auto& p : bad) mean_bad += p.position;
    mean_bad /= double(bad.size());
    double rms_bad = 0.0;
    for (const auto& p : bad) rms_bad += (p.position - mean_bad).head<2>().squaredNorm();
    rms_bad = std::sqrt(rms_bad / double(bad.size()));
    CHECK(rms_bad > rms);
  }

  SECTION("pose/scan count mismatch is rejected") {
    CHECK_THROWS_AS(rebuildMap({Pose::identity()}, {}, tax), std::invalid_argument);
  }
}
