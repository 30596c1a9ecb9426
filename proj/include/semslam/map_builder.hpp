// semslam - semantic-assisted LiDAR odometry, loop closure and mapping
// SPDX-License-Identifier: Apache-2.0
//
// Assembles the global semantic map: per-scan retained points moved into
// the world frame by the (optimized) poses, concatenated and re-downsampled
// class by class for export.

#ifndef SEMSLAM_MAP_BUILDER_HPP
#define SEMSLAM_MAP_BUILDER_HPP

#include <stdexcept>
#include <vector>

#include "semslam/downsample.hpp"
#include "semslam/se3.hpp"

namespace semslam {

[[nodiscard]] inline std::vector<LabeledPoint> rebuildMap(
    const std::vector<Pose>& poses, const std::vector<std::vector<LabeledPoint>>& scan_clouds,
    const LabelTaxonomy& taxonomy) {
  if (poses.size() != scan_clouds.size()) {
    throw std::invalid_argument("rebuildMap: one pose per scan required");
  }
  std::vector<LabeledPoint> merged;
  for (std::size_t s = 0; s < poses.size(); ++s) {
    for (const LabeledPoint& p : scan_clouds[s]) {
      merged.push_back({poses[s] * p.position, p.label});
    }
  }
  return semanticDownsample(merged, taxonomy);
}

}  // namespace semslam

#endif  // SEMSLAM_MAP_BUILDER_HPP
