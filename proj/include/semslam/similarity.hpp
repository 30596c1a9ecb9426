// semslam - semantic-assisted LiDAR odometry, loop closure and mapping
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic graph-pair similarity in [0, 1]:
//   score = 0.5 * H + 0.5 * D
// H: per-class node-count histogram intersection over the larger total.
// D: mean over classes with >= 2 nodes in both graphs of the agreement of
//    sorted intra-class pairwise centroid distances (aligned, truncated,
//    mean absolute difference capped at 20 m). Pairwise distances make D
//    invariant to rigid motions of either graph. Falls back to H when no
//    class qualifies. The scorer is an interchangeable component: the loop
//    pipeline only consumes the [0, 1] score.

#ifndef SEMSLAM_SIMILARITY_HPP
#define SEMSLAM_SIMILARITY_HPP

#include <algorithm>
#include <map>
#include <vector>

#include "semslam/semantic_graph.hpp"

namespace semslam {

inline constexpr double kSimilarityDistanceCap = 20.0;  // meters

namespace detail {

[[nodiscard]] inline std::map<ClassId, std::vector<const GraphNode*>> nodesByClass(
    const SemanticGraph& g) {
  std::map<ClassId, std::vector<const GraphNode*>> out;
  for (const GraphNode& n : g.nodes) out[n.label].push_back(&n);
  return out;
}

[[nodiscard]] inline std::vector<double> sortedPairwiseDistances(
    const std::vector<const GraphNode*>& nodes) {
  std::vector<double> d;
  d.reserve(nodes.size() * (nodes.size() - 1) / 2);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      d.push_back((nodes[i]->centroid - nodes[j]->centroid).norm());
    }
  }
  std::sort(d.begin(), d.end());
  return d;
}

}  // namespace detail

[[nodiscard]] inline double similarity(const SemanticGraph& g1, const SemanticGraph& g2) {
  if (g1.empty() || g2.empty()) return 0.0;

  const auto by_class_1 = detail::nodesByClass(g1);
  const auto by_class_2 = detail::nodesByClass(g2);

  // H: histogram intersection over per-class node counts.
  double intersection = 0.0;
  for (const auto& [label, nodes1] : by_class_1) {
    const auto it = by_class_2.find(label);
    if (it == by_class_2.end()) continue;
    intersection += double(std::min(nodes1.size(), it->second.size()));
  }
  const double h = intersection / double(std::max(g1.nodes.size(), g2.nodes.size()));

  // D: intra-class pairwise-distance agreement.
  double d_sum = 0.0;
  int d_classes = 0;
  for (const auto& [label, nodes1] : by_class_1) {
    const auto it = by_class_2.find(label);
    if (it == by_class_2.end()) continue;
    if (nodes1.size() < 2 || it->second.size() < 2) continue;
    const auto dist1 = detail::sortedPairwiseDistances(nodes1);
    const auto dist2 = detail::sortedPairwiseDistances(it->second);
    const std::size_t n = std::min(dist1.size(), dist2.size());
    double mad = 0.0;
    for (std::size_t i = 0; i < n; ++i) mad += std::abs(dist1[i] - dist2[i]);
    mad = std::min(mad / double(n), kSimilarityDistanceCap);
    d_sum += 1.0 - mad / kSimilarityDistanceCap;
    ++d_classes;
  }
  const double d = d_classes > 0 ? d_sum / double(d_classes) : h;

  return 0.5 * h + 0.5 * d;
}

}  // namespace semslam

#endif  // SEMSLAM_SIMILARITY_HPP
