// semslam - semantic-assisted LiDAR odometry, loop closure and mapping
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "semslam/icp.hpp"
#include "support/structured_scene.hpp"
#include "support/test_helpers.hpp"

using namespace semslam;
using semslam::testing::makeStructuredScene;
using semslam::testing::transformFeatures;

namespace {

Pose yawTranslate(double yaw_deg, const Eigen::Vector3d& t) {
  Twist xi = Twist::Zero();
  xi(2) = yaw_deg * M_PI / 180.0;
  Pose p = se3Exp(xi);
  p.translation = t;
  return p;
}

}  // namespace

TEST_CASE("self-registration converges to the identity") {
  const LabelTaxonomy tax = defaultTaxonomy();
  // Ground and poles only: every 5-NN fit is exact, so the solved pose and
  // the residual both sit at zero.
  auto scene = makeStructuredScene(tax);
  const ClassId building = tax.idOf("building");
  std::erase_if(scene.submap_features.planars,
                [&](const Feature& f) { return f.label == building; });

  Submap submap(20, tax);
  submap.insert(scene.submap_features, Pose::identity());

  const auto result = registerScan(scene.submap_features, submap, Pose::identity(), tax);
  REQUIRE(!result.no_correspondences);
  CHECK(result.converged);
  CHECK(result.pose.translation.norm() < 1e-6);
  CHECK(result.pose.rotationAngle() < 1e-7);
  CHECK(result.cost < 1e-6);
  CHECK(result.n_edge_correspondences > 0);
  CHECK(result.n_plane_correspondences > 0);
}

TEST_CASE("registration recovers a known displacement") {
  const LabelTaxonomy tax = defaultTaxonomy();
  const auto scene = makeStructuredScene(tax);

  Submap submap(20, tax);
  submap.insert(scene.submap_features, Pose::identity());

  const Pose truth = yawTranslate(5.0, {0.4, -0.3, 0.05});
  // Scan frame features: world points pulled back through the true pose.
  const FeatureSet scan = transformFeatures(scene.scan_features, truth.inverse());

  const auto result = registerScan(scan, submap, Pose::identity(), tax);
  REQUIRE(!result.no_correspondences);
  CHECK(result.converged);

  const Pose err = truth.inverse() * result.pose;
  CHECK(err.translation.norm() < 0.01);
  CHECK(err.rotationAngle() * 180.0 / M_PI < 0.1);
}

TEST_CASE("cost is non-increasing across accepted solver steps") {
  const LabelTaxonomy tax = defaultTaxonomy();
  const auto scene = makeStructuredScene(tax);
  Submap submap(20, tax);
  submap.insert(scene.submap_features, Pose::identity());

  const Pose truth = yawTranslate(-4.0, {0.3, 0.5, -0.02});
  const auto result =
      registerScan(transformFeatures(scene.scan_features, truth.inverse()), submap,
                   Pose::identity(), tax);
  REQUIRE(result.steps.size() > 1);
  for (const AcceptedStep& s : result.steps) CHECK(s.cost_after <= s.cost_before);
}

TEST_CASE("absent classes yield the zero-correspondence error flag") {
  const LabelTaxonomy tax = defaultTaxonomy();
  const auto scene = makeStructuredScene(tax);
  Submap submap(20, tax);
  submap.insert(scene.submap_features, Pose::identity());

  // All-vegetation features; the submap has no vegetation cloud.
  FeatureSet foreign;
  const ClassId veg = tax.idOf("vegetation");
  for (double x = 0.0; x < 5.0; x += 0.2) {
    foreign.edges.push_back({{x, 1.0, 1.0}, veg, 1.0});
    foreign.planars.push_back({{x, 2.0, 0.0}, veg, 0.01});
  }
  const auto result = registerScan(foreign, submap, Pose::identity(), tax);
  CHECK(result.no_correspondences);
  CHECK(!result.converged);
  CHECK(result.n_edge_correspondences == 0);
  CHECK(result.n_plane_correspondences == 0);
  CHECK(result.n_edge_features > 0);

  // Same geometry under a different class in the submap must not match:
  // correspondences are class-pure by construction.
  FeatureSet trunk_decoy = scene.submap_features;
  for (auto& f : trunk_decoy.edges) f.label = tax.idOf("trunk");
  for (auto& f : trunk_decoy.planars) f.label = tax.idOf("trunk");
  Submap decoy_map(20, tax);
  decoy_map.insert(trunk_decoy, Pose::identity());
  const auto pure = registerScan(scene.scan_features, decoy_map, Pose::identity(), tax);
  CHECK(pure.no_correspondences);
}

TEST_CASE("doubling all class weights does not move the minimizer") {
  const LabelTaxonomy base = defaultTaxonomy();

  std::vector<ClassSpec> doubled_specs;
  for (ClassId i = 0; i < base.size(); ++i) {
    ClassSpec s = base.spec(i);
    s.weight *= 2.0;
    doubled_specs.push_back(s);
  }
  std::map<std::uint32_t, std::string> raw;
  for (const auto& [k, v] : base.rawMap()) {
    raw[k] = v == kDiscard ? "discard" : base.name(ClassId(v));
  }
  const LabelTaxonomy doubled(doubled_specs, raw);

  const auto scene = makeStructuredScene(base);
  const Pose truth = yawTranslate(3.0, {0.2, 0.4, 0.0});
  const FeatureSet scan = transformFeatures(scene.scan_features, truth.inverse());

  Submap submap_a(20, base);
  submap_a.insert(scene.submap_features, Pose::identity());
  Submap submap_b(20, doubled);
  submap_b.insert(scene.submap_features, Pose::identity());

  const auto a = registerScan(scan, submap_a, Pose::identity(), base);
  const auto b = registerScan(scan, submap_b, Pose::identity(), doubled);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  CHECK((a.pose.translation - b.pose.translation).norm() < 1e-6);
  CHECK((a.pose.rotation - b.pose.rotation).norm() < 1e-6);
  CHECK(b.cost == Catch::Approx(2.0 * a.cost).epsilon(1e-9));
}

TEST_CASE("submap window semantics") {
  const LabelTaxonomy tax = defaultTaxonomy();

  FeatureSet frame;
  frame.edges.push_back({{1.0, 2.0, 3.0}, tax.idOf("pole"), 1.0});

  SECTION("empty submap grows to one frame") {
    Submap submap(20, tax);
    CHECK(submap.empty());
    submap.insert(frame, Pose::identity());
    CHECK(submap.frameCount() == 1);
  }

  SECTION("window evicts the oldest frame") {
    Submap submap(3, tax);
    for (int i = 0; i < 4; ++i) {
      Pose p;
      p.translation = Eigen::Vector3d(10.0 * i, 0, 0);
      submap.insert(frame, p);
    }
    CHECK(submap.frameCount() == 3);
    // The frame at x=11 (from pose 10*0) is gone; three survivors remain.
    const auto pts = submap.edgePoints(tax.idOf("pole"));
    REQUIRE(pts.size() == 3);
    for (const auto& p : pts) CHECK(p.position.x() >= 10.9);
  }

  SECTION("insertion order does not change the windowed point set") {
    const auto scene = makeStructuredScene(tax, 1.0);
    std::vector<Pose> poses;
    for (int i = 0; i < 5; ++i) {
      Pose p;
      p.translation = Eigen::Vector3d(0.3 * i, -0.2 * i, 0);
      poses.push_back(p);
    }
    Submap fwd(5, tax), rev(5, tax);
    for (int i = 0; i < 5; ++i) fwd.insert(scene.submap_features, poses[i]);
    for (int i = 4; i >= 0; --i) rev.insert(scene.submap_features, poses[i]);

    for (ClassId l = 0; l < tax.size(); ++l) {
      const auto a = fwd.edgePoints(l);
      const auto b = rev.edgePoints(l);
      REQUIRE(a.size() == b.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].position == b[i].position);
      }
    }
  }
}
