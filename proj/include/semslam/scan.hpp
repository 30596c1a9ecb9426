// semslam - semantic-assisted LiDAR odometry, loop closure and mapping
// SPDX-License-Identifier: Apache-2.0

#ifndef SEMSLAM_SCAN_HPP
#define SEMSLAM_SCAN_HPP

#include <Eigen/Core>

#include <vector>

#include "semslam/labels.hpp"

namespace semslam {

struct SemanticPoint {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  ClassId label = 0;
  int ring = 0;       // laser index
  double range = 0.0; // meters
};

/// One labeled LiDAR sweep after taxonomy filtering.
struct SemanticScan {
  std::vector<SemanticPoint> points;

  [[nodiscard]] bool empty() const { return points.empty(); }
  [[nodiscard]] std::size_t size() const { return points.size(); }
};

/// A point that kept only its class, the common currency of the
/// downsampler, the submap and the map builder.
struct LabeledPoint {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  ClassId label = 0;
};

}  // namespace semslam

#endif  // SEMSLAM_SCAN_HPP
