// semslam - semantic-assisted LiDAR odometry, loop closure and mapping
// SPDX-License-Identifier: Apache-2.0
//
// Loop-closure detection: odometry-gated candidate proposal
//   delta_d = max(delta_min, min(delta_max, sigma * d))
// over travel distance d, batch similarity scoring against the graph map,
// and geometric verification by registering the query scan against a
// candidate-local submap. Verification thresholds the registration cost in
// its unsquared form, so the bound keeps its meaning in meters.

#ifndef SEMSLAM_LOOP_CLOSURE_HPP
#define SEMSLAM_LOOP_CLOSURE_HPP

#include <algorithm>
#include <functional>
#include <ostream>
#include <random>
#include <vector>

#include "semslam/icp.hpp"
#include "semslam/similarity.hpp"

namespace semslam {

struct LoopConfig {
  double sigma = 0.05;            // odometry drift rate
  double delta_min = 15.0;        // meters
  double delta_max = 100.0;       // meters
  int n_candidates = 64;          // N_candi
  double score_threshold = 0.95;  // zeta
  int n_loop = 5;                 // verified candidates per query
  double delta_r = 100.0;         // verification cost bound
  int min_index_gap = 50;         // scans
  std::uint64_t rng_seed = 0;
};

struct LoopEdge {
  int i = 0;  // candidate (older) scan
  int j = 0;  // query scan
  Pose measurement;  // Z_ij: pose of j in i's frame
  double cost = 0.0;
  double score = 0.0;
};

/// Eq.-5 search radius for a given travel distance.
[[nodiscard]] inline double gateRadius(double travel_distance, const LoopConfig& cfg) {
  return std::max(cfg.delta_min, std::min(cfg.delta_max, cfg.sigma * travel_distance));
}

/// Candidate scans for the query `current`: all earlier scans outside the
/// temporal exclusion window whose estimated position lies within the gate
/// radius of the accumulated travel distance between them. When more than
/// N_candi qualify, a seeded uniform sample is drawn (random rather than
/// nearest: under drift the nearest estimates are not the likeliest true
/// matches). Deterministic for a given (seed, current).
[[nodiscard]] inline std::vector<int> proposeCandidates(
    int current, const std::vector<Pose>& trajectory,
    const std::vector<double>& cumulative_distance, const LoopConfig& cfg) {
  std::vector<int> eligible;
  const Eigen::Vector3d here = trajectory.at(current).translation;
  for (int j = 0; j + cfg.min_index_gap <= current; ++j) {
    const double travel = cumulative_distance.at(current) - cumulative_distance.at(j);
    const double radius = gateRadius(travel, cfg);
    if ((trajectory[j].translation - here).norm() < radius) eligible.push_back(j);
  }
  if (static_cast<int>(eligible.size()) <= cfg.n_candidates) return eligible;

  // Partial Fisher-Yates with a per-query engine; modulo bias is irrelevant
  // here, cross-platform reproducibility is not.
  std::mt19937_64 rng(cfg.rng_seed ^ (0x9E3779B97F4A7C15ull * std::uint64_t(current + 1)));
  std::vector<int> pool = eligible;
  std::vector<int> picked;
  picked.reserve(cfg.n_candidates);
  for (int k = 0; k < cfg.n_candidates; ++k) {
    const std::size_t idx = k + std::size_t(rng() % (pool.size() - k));
    std::swap(pool[k], pool[idx]);
    picked.push_back(pool[k]);
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

/// Scores the candidate batch, keeps scores above the threshold, verifies
/// the best N_loop geometrically and emits the surviving edges ordered by
/// candidate index. A failed registration skips its candidate only.
[[nodiscard]] inline std::vector<LoopEdge> detectLoops(
    int current, const SemanticGraph& current_graph, const FeatureSet& current_features,
    const GraphMap& graph_map, const std::vector<int>& candidates,
    const std::function<Submap(int)>& submap_factory, const std::function<Pose(int)>& pose_of,
    const Pose& odometry_pose, const LabelTaxonomy& taxonomy, const LoopConfig& cfg,
    const IcpConfig& icp_cfg) {
  struct Scored {
    int index;
    double score;
  };
  std::vector<Scored> scored;
  for (int idx : candidates) {
    if (!graph_map.contains(idx)) continue;
    const double s = similarity(current_graph, graph_map.get(idx).graph);
    if (s > cfg.score_threshold) scored.push_back({idx, s});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.index < b.index;
  });
  if (static_cast<int>(scored.size()) > cfg.n_loop) scored.resize(std::size_t(cfg.n_loop));

  std::vector<LoopEdge> edges;
  for (const Scored& cand : scored) {
    try {
      const Submap submap = submap_factory(cand.index);
      if (submap.empty()) continue;
      const RegistrationResult reg =
          registerScan(current_features, submap, odometry_pose, taxonomy, icp_cfg);
      if (reg.no_correspondences || !reg.converged) continue;
      if (reg.cost > cfg.delta_r) continue;
      LoopEdge edge;
      edge.i = cand.index;
      edge.j = current;
      edge.measurement = pose_of(cand.index).inverse() * reg.pose;
      edge.cost = reg.cost;
      edge.score = cand.score;
      edges.push_back(edge);
    } catch (const std::exception&) {
      continue;  // a broken candidate never aborts the batch
    }
  }
  std::sort(edges.begin(), edges.end(),
            [](const LoopEdge& a, const LoopEdge& b) { return a.i < b.i; });
  return edges;
}

/// Diagnostics log line: "i j cost score" followed by the row-major 3x4 of
/// the measured relative pose.
inline void writeLoopEdge(std::ostream& out, const LoopEdge& edge) {
  out << edge.i << ' ' << edge.j << ' ' << edge.cost << ' ' << edge.score;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) {
      out << ' '
          << (c < 3 ? edge.measurement.rotation(r, c) : edge.measurement.translation(r));
    }
  }
  out << '\n';
}

}  // namespace semslam

#endif  // SEMSLAM_LOOP_CLOSURE_HPP
