// semslam - semantic-assisted LiDAR odometry, loop closure and mapping
// SPDX-License-Identifier: Apache-2.0
//
// Class-aware voxel downsampling. Every class is filtered on its own grid
// with its own voxel edge length, so small-object classes keep detail that
// a uniform grid would erase, and classes never merge.

#ifndef SEMSLAM_DOWNSAMPLE_HPP
#define SEMSLAM_DOWNSAMPLE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "semslam/labels.hpp"
#include "semslam/scan.hpp"

namespace semslam {

namespace detail {

struct VoxelKey {
  std::int64_t x, y, z;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const {
    std::uint64_t h = 1469598103934665603ull;
    for (std::int64_t v : {k.x, k.y, k.z}) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

[[nodiscard]] inline VoxelKey voxelOf(const Eigen::Vector3d& p, double edge) {
  return {static_cast<std::int64_t>(std::floor(p.x() / edge)),
          static_cast<std::int64_t>(std::floor(p.y() / edge)),
          static_cast<std::int64_t>(std::floor(p.z() / edge))};
}

inline bool lexLess(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  if (a.x() != b.x()) return a.x() < b.x();
  if (a.y() != b.y()) return a.y() < b.y();
  return a.z() < b.z();
}

}  // namespace detail

/// One representative per occupied (class, voxel) cell: the input point
/// nearest the cell's point centroid, ties to the lexicographically smaller
/// coordinate. Output is sorted by (class, coordinate), so the result is a
/// pure function of the input multiset. Idempotent.
[[nodiscard]] inline std::vector<LabeledPoint> semanticDownsample(
    const std::vector<LabeledPoint>& points, const LabelTaxonomy& taxonomy) {
  struct Cell {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    std::size_t count = 0;
  };
  using Grid = std::unordered_map<detail::VoxelKey, Cell, detail::VoxelKeyHash>;

  std::vector<Grid> grids(taxonomy.size());
  for (const LabeledPoint& p : points) {
    Cell& c = grids[p.label][detail::voxelOf(p.position, taxonomy.spec(p.label).voxel_size)];
    c.sum += p.position;
    ++c.count;
  }

  struct Best {
    Eigen::Vector3d point;
    double dist2;
    bool set = false;
  };
  std::vector<std::unordered_map<detail::VoxelKey, Best, detail::VoxelKeyHash>> best(
      taxonomy.size());
  for (const LabeledPoint& p : points) {
    const auto key = detail::voxelOf(p.position, taxonomy.spec(p.label).voxel_size);
    const Cell& c = grids[p.label].at(key);
    const Eigen::Vector3d centroid = c.sum / static_cast<double>(c.count);
    const double d2 = (p.position - centroid).squaredNorm();
    Best& b = best[p.label][key];
    if (!b.set || d2 < b.dist2 || (d2 == b.dist2 && detail::lexLess(p.position, b.point))) {
      b = {p.position, d2, true};
    }
  }

  std::vector<LabeledPoint> out;
  for (ClassId label = 0; label < taxonomy.size(); ++label) {
    std::vector<Eigen::Vector3d> reps;
    reps.reserve(best[label].size());
    for (const auto& [key, b] : best[label]) reps.push_back(b.point);
    std::sort(reps.begin(), reps.end(), detail::lexLess);
    for (const auto& r : reps) out.push_back({r, label});
  }
  return out;
}

}  // namespace semslam

#endif  // SEMSLAM_DOWNSAMPLE_HPP
