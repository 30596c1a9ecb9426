// semslam - semantic-assisted LiDAR odometry, loop closure and mapping
// SPDX-License-Identifier: Apache-2.0
//
// Per-point roughness and per-ring edge/planar feature selection.
// Roughness of a point against its ring neighborhood:
//   (1 / (n * |p_i|)) * | sum_j (p_j - p_i) |
// Each ring is azimuth-sorted and split into equal-count parts; per part the
// sharpest points above the threshold become edges, the flattest below it
// become planars.

#ifndef SEMSLAM_FEATURES_HPP
#define SEMSLAM_FEATURES_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "semslam/scan.hpp"

namespace semslam {

struct FeatureConfig {
  double alpha = 0.1;              // roughness split threshold
  int n_ring_parts = 6;            // parts per ring
  int n_edge_per_part = 20;        // sharpest points kept per part
  int n_plane_per_part = 50;       // flattest points kept per part
  int neighborhood_half_width = 5; // ring neighbors per side
  double occlusion_range_jump = 1.0;  // range step that voids edge candidacy
};

struct Feature {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  ClassId label = 0;
  double roughness = 0.0;
};

struct FeatureSet {
  std::vector<Feature> edges;    // C_e
  std::vector<Feature> planars;  // C_p

  [[nodiscard]] bool empty() const { return edges.empty() && planars.empty(); }
};

/// Roughness of p_i against neighbors drawn from the same ring.
/// Throws if p_i sits at the sensor origin (the range normalization
/// would divide by zero).
[[nodiscard]] inline double roughness(const Eigen::Vector3d& p_i,
                                      const std::vector<Eigen::Vector3d>& neighbors) {
  if (neighbors.empty()) throw std::invalid_argument("roughness: empty neighborhood");
  const double range = p_i.norm();
  if (range < 1e-9) throw std::invalid_argument("roughness: point at the origin");
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const Eigen::Vector3d& p_j : neighbors) sum += p_j - p_i;
  return sum.norm() / (static_cast<double>(neighbors.size()) * range);
}

namespace detail {

struct RingPoint {
  std::size_t scan_index;
  double azimuth;
  double rough = 0.0;
  bool has_roughness = false;
  bool edge_eligible = true;
};

}  // namespace detail

/// Selects edge and planar features from a labeled scan. Points need ring
/// indices; rings shorter than a full neighborhood produce nothing.
/// Neighborhoods are ring-local and may straddle part boundaries; a range
/// discontinuity inside the neighborhood voids edge candidacy only.
[[nodiscard]] inline FeatureSet extractFeatures(const SemanticScan& scan,
                                                const FeatureConfig& cfg) {
  FeatureSet out;
  if (scan.empty()) return out;

  std::map<int, std::vector<detail::RingPoint>> rings;
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    const auto& p = scan.points[i];
    rings[p.ring].push_back({i, std::atan2(p.position.y(), p.position.x())});
  }

  const int hw = cfg.neighborhood_half_width;
  for (auto& [ring_id, ring] : rings) {
    const int n = static_cast<int>(ring.size());
    if (n < 2 * hw + 1) continue;

    std::stable_sort(ring.begin(), ring.end(),
                     [](const detail::RingPoint& a, const detail::RingPoint& b) {
                       return a.azimuth < b.azimuth;
                     });

    for (int i = hw; i < n - hw; ++i) {
      const Eigen::Vector3d& center = scan.points[ring[i].scan_index].position;
      Eigen::Vector3d sum = Eigen::Vector3d::Zero();
      bool jump = false;
      double prev_range = scan.points[ring[i - hw].scan_index].range;
      for (int j = i - hw; j <= i + hw; ++j) {
        const auto& q = scan.points[ring[j].scan_index];
        if (std::abs(q.range - prev_range) > cfg.occlusion_range_jump) jump = true;
        prev_range = q.range;
        if (j == i) continue;
        sum += q.position - center;
      }
      ring[i].rough = sum.norm() / (2.0 * hw * center.norm());
      ring[i].has_roughness = true;
      ring[i].edge_eligible = !jump;
    }

    // Equal-count contiguous parts over the azimuth-sorted ring.
    for (int part = 0; part < cfg.n_ring_parts; ++part) {
      const int begin = static_cast<int>(static_cast<std::int64_t>(n) * part / cfg.n_ring_parts);
      const int end =
          static_cast<int>(static_cast<std::int64_t>(n) * (part + 1) / cfg.n_ring_parts);

      std::vector<int> candidates;
      for (int i = begin; i < end; ++i) {
        if (ring[i].has_roughness) candidates.push_back(i);
      }

      auto by_roughness_desc = [&](int a, int b) {
        if (ring[a].rough != ring[b].rough) return ring[a].rough > ring[b].rough;
        return ring[a].scan_index < ring[b].scan_index;
      };
      auto by_roughness_asc = [&](int a, int b) {
        if (ring[a].rough != ring[b].rough) return ring[a].rough < ring[b].rough;
        return ring[a].scan_index < ring[b].scan_index;
      };

      std::vector<int> order = candidates;
      std::sort(order.begin(), order.end(), by_roughness_desc);
      int taken = 0;
      for (int idx : order) {
        if (taken >= cfg.n_edge_per_part) break;
        if (!ring[idx].edge_eligible || ring[idx].rough <= cfg.alpha) continue;
        const auto& p = scan.points[ring[idx].scan_index];
        out.edges.push_back({p.position, p.label, ring[idx].rough});
        ++taken;
      }

      std::sort(order.begin(), order.end(), by_roughness_asc);
      taken = 0;
      for (int idx : order) {
        if (taken >= cfg.n_plane_per_part) break;
        if (ring[idx].rough >= cfg.alpha) break;  // ascending: nothing flatter follows
        const auto& p = scan.points[ring[idx].scan_index];
        out.planars.push_back({p.position, p.label, ring[idx].rough});
        ++taken;
      }
    }
  }
  return out;
}

}  // namespace semslam

#endif  // SEMSLAM_FEATURES_HPP
