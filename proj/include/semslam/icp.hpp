// semslam - semantic-assisted LiDAR odometry, loop closure and mapping
// SPDX-License-Identifier: Apache-2.0
//
// Scan-to-submap registration. Correspondences are searched per semantic
// class only (an edge feature of class l matches lines fitted in the class-l
// edge submap), residuals are the point-to-line / point-to-plane distances,
// and a damped Gauss-Newton over a twist minimizes the weighted sum of
// squared residuals. The reported cost is the unsquared weighted sum, which
// is what the loop-closure verification thresholds.

#ifndef SEMSLAM_ICP_HPP
#define SEMSLAM_ICP_HPP

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "semslam/residuals.hpp"
#include "semslam/submap.hpp"

namespace semslam {

struct IcpConfig {
  int n_edge_neighbors = 5;       // N_ne
  int n_plane_neighbors = 5;      // N_np
  int max_iterations = 30;
  double convergence_eps = 1e-6;  // twist update norm
  double max_correspondence_dist = 1.0;  // meters, on the nearest neighbor
  double plane_normal_tolerance_deg = 30.0;
  double line_fit_ratio = 3.0;    // largest eigenvalue vs middle
  double plane_fit_ratio = 0.1;   // smallest eigenvalue vs middle
  double lm_lambda_init = 1e-4;
  double lm_lambda_up = 10.0;
  double lm_lambda_down = 0.3;
  int lm_max_retries = 8;
};

struct AcceptedStep {
  double cost_before = 0.0;  // squared objective on the step's correspondences
  double cost_after = 0.0;
  double step_norm = 0.0;
};

struct RegistrationResult {
  Pose pose;
  double cost = 0.0;          // final weighted sum of distances (unsquared)
  double squared_cost = 0.0;  // final weighted sum of squared distances
  int n_edge_correspondences = 0;
  int n_plane_correspondences = 0;
  bool converged = false;
  bool no_correspondences = false;
  int n_edge_features = 0;   // diagnostics for the failure path
  int n_plane_features = 0;
  std::vector<AcceptedStep> steps;
};

namespace detail {

struct Correspondence {
  Eigen::Vector3d local;  // feature point in scan frame
  double weight = 1.0;
  bool is_edge = true;
  FittedLine line{};
  FittedPlane plane{};
};

inline void buildCorrespondences(const FeatureSet& features, const Submap& submap,
                                 const Pose& pose, const LabelTaxonomy& taxonomy,
                                 const IcpConfig& cfg, std::vector<Correspondence>& out) {
  out.clear();
  const double max_d2 = cfg.max_correspondence_dist * cfg.max_correspondence_dist;

  for (const Feature& f : features.edges) {
    const KdTree& tree = submap.edgeTree(f.label);
    if (tree.size() < std::size_t(cfg.n_edge_neighbors)) continue;
    const Eigen::Vector3d y = pose * f.position;
    const auto nn = tree.knn(y, std::size_t(cfg.n_edge_neighbors));
    if (nn.front().dist2 > max_d2) continue;
    std::vector<Eigen::Vector3d> support;
    support.reserve(nn.size());
    for (const Neighbor& n : nn) support.push_back(tree.point(n.index));
    const auto line = fitLine(support, cfg.line_fit_ratio);
    if (!line) continue;
    Correspondence c;
    c.local = f.position;
    c.weight = taxonomy.spec(f.label).weight;
    c.is_edge = true;
    c.line = *line;
    out.push_back(c);
  }

  for (const Feature& f : features.planars) {
    const KdTree& tree = submap.planarTree(f.label);
    if (tree.size() < std::size_t(cfg.n_plane_neighbors)) continue;
    const Eigen::Vector3d y = pose * f.position;
    const auto nn = tree.knn(y, std::size_t(cfg.n_plane_neighbors));
    if (nn.front().dist2 > max_d2) continue;
    std::vector<Eigen::Vector3d> support;
    support.reserve(nn.size());
    for (const Neighbor& n : nn) support.push_back(tree.point(n.index));
    const auto plane = fitPlaneConstrained(support, taxonomy.spec(f.label).prior,
                                           cfg.plane_normal_tolerance_deg, cfg.plane_fit_ratio);
    if (!plane) continue;
    Correspondence c;
    c.local = f.position;
    c.weight = taxonomy.spec(f.label).weight;
    c.is_edge = false;
    c.plane = *plane;
    out.push_back(c);
  }
}

[[nodiscard]] inline double squaredCost(const std::vector<Correspondence>& corrs,
                                        const Pose& pose) {
  double cost = 0.0;
  for (const Correspondence& c : corrs) {
    const Eigen::Vector3d y = pose * c.local;
    const double d = c.is_edge ? lineResidual(y, c.line).value : planeResidual(y, c.plane).value;
    cost += c.weight * d * d;
  }
  return cost;
}

}  // namespace detail

/// Registers a feature scan against the submap starting from `init`.
/// Zero valid correspondences raise the result's error flag with the
/// feature counts as diagnostics; the pose is then left at `init`.
[[nodiscard]] inline RegistrationResult registerScan(const FeatureSet& features,
                                                     const Submap& submap, const Pose& init,
                                                     const LabelTaxonomy& taxonomy,
                                                     const IcpConfig& cfg = {}) {
  RegistrationResult result;
  result.pose = init;
  result.n_edge_features = static_cast<int>(features.edges.size());
  result.n_plane_features = static_cast<int>(features.planars.size());

  std::vector<detail::Correspondence> corrs;
  double lambda = cfg.lm_lambda_init;

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    detail::buildCorrespondences(features, submap, result.pose, taxonomy, cfg, corrs);
    if (corrs.empty()) {
      result.no_correspondences = true;
      result.converged = false;
      return result;
    }

    Mat6 h = Mat6::Zero();
    Twist b = Twist::Zero();
    double cost0 = 0.0;
    for (const detail::Correspondence& c : corrs) {
      const Eigen::Vector3d y = result.pose * c.local;
      const ResidualJacobian rj =
          c.is_edge ? lineResidual(y, c.line) : planeResidual(y, c.plane);
      h.noalias() += c.weight * rj.jacobian.transpose() * rj.jacobian;
      b.noalias() += c.weight * rj.jacobian.transpose() * rj.value;
      cost0 += c.weight * rj.value * rj.value;
    }

    bool accepted = false;
    Twist delta = Twist::Zero();
    for (int attempt = 0; attempt < cfg.lm_max_retries; ++attempt) {
      const Mat6 damped = h + lambda * Mat6::Identity();
      delta = damped.ldlt().solve(-b);
      const Pose candidate = se3Exp(delta) * result.pose;
      const double cost1 = detail::squaredCost(corrs, candidate);
      if (cost1 <= cost0) {
        result.pose = candidate;
        result.steps.push_back({cost0, cost1, delta.norm()});
        lambda *= cfg.lm_lambda_down;
        accepted = true;
        break;
      }
      lambda *= cfg.lm_lambda_up;
    }
    if (!accepted) break;  // damping exhausted; the current pose is the minimum we found
    if (delta.norm() < cfg.convergence_eps) {
      result.converged = true;
      break;
    }
  }

  // Final correspondence set and the paper-form cost at the final pose.
  detail::buildCorrespondences(features, submap, result.pose, taxonomy, cfg, corrs);
  if (corrs.empty()) {
    result.no_correspondences = true;
    result.converged = false;
    return result;
  }
  result.cost = 0.0;
  result.squared_cost = 0.0;
  for (const detail::Correspondence& c : corrs) {
    const Eigen::Vector3d y = result.pose * c.local;
    const double d = c.is_edge ? lineResidual(y, c.line).value : planeResidual(y, c.plane).value;
    result.cost += c.weight * d;
    result.squared_cost += c.weight * d * d;
    (c.is_edge ? result.n_edge_correspondences : result.n_plane_correspondences) += 1;
  }
  return result;
}

}  // namespace semslam

#endif  // SEMSLAM_ICP_HPP
