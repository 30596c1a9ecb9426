// semslam - semantic-assisted LiDAR odometry, loop closure and mapping
// SPDX-License-Identifier: Apache-2.0
//
// Sliding-window feature submap. The window holds the last N_m frames of
// world-frame features; per class and feature type the windowed points are
// re-downsampled and indexed in a kd-tree whenever the window changes.

#ifndef SEMSLAM_SUBMAP_HPP
#define SEMSLAM_SUBMAP_HPP

#include <deque>
#include <vector>

#include "semslam/downsample.hpp"
#include "semslam/features.hpp"
#include "semslam/kdtree.hpp"
#include "semslam/se3.hpp"

namespace semslam {

class Submap {
 public:
  Submap(int window_size, const LabelTaxonomy& taxonomy)
      : window_size_(window_size), taxonomy_(&taxonomy) {
    edge_clouds_.resize(taxonomy.size());
    planar_clouds_.resize(taxonomy.size());
  }

  [[nodiscard]] bool empty() const { return frames_.empty(); }
  [[nodiscard]] int frameCount() const { return static_cast<int>(frames_.size()); }
  [[nodiscard]] int windowSize() const { return window_size_; }

  /// Appends a frame transformed to world; evicts the oldest beyond the
  /// window and rebuilds the per-class clouds and trees.
  void insert(const FeatureSet& features, const Pose& pose) {
    Frame frame;
    frame.edges.reserve(features.edges.size());
    for (const Feature& f : features.edges) frame.edges.push_back({pose * f.position, f.label});
    frame.planars.reserve(features.planars.size());
    for (const Feature& f : features.planars) {
      frame.planars.push_back({pose * f.position, f.label});
    }
    frames_.push_back(std::move(frame));
    while (static_cast<int>(frames_.size()) > window_size_) frames_.pop_front();
    rebuild();
  }

  [[nodiscard]] const KdTree& edgeTree(ClassId label) const { return edge_clouds_[label]; }
  [[nodiscard]] const KdTree& planarTree(ClassId label) const { return planar_clouds_[label]; }

  /// All windowed edge points of one class, downsampled (the tree's payload).
  [[nodiscard]] std::vector<LabeledPoint> edgePoints(ClassId label) const {
    std::vector<LabeledPoint> out;
    for (std::size_t i = 0; i < edge_clouds_[label].size(); ++i) {
      out.push_back({edge_clouds_[label].point(static_cast<std::uint32_t>(i)), label});
    }
    return out;
  }

 private:
  struct Frame {
    std::vector<LabeledPoint> edges;
    std::vector<LabeledPoint> planars;
  };

  void rebuild() {
    std::vector<LabeledPoint> edges, planars;
    for (const Frame& f : frames_) {
      edges.insert(edges.end(), f.edges.begin(), f.edges.end());
      planars.insert(planars.end(), f.planars.begin(), f.planars.end());
    }
    const auto edges_ds = semanticDownsample(edges, *taxonomy_);
    const auto planars_ds = semanticDownsample(planars, *taxonomy_);

    std::vector<std::vector<Eigen::Vector3d>> edge_split(taxonomy_->size());
    for (const LabeledPoint& p : edges_ds) edge_split[p.label].push_back(p.position);
    std::vector<std::vector<Eigen::Vector3d>> planar_split(taxonomy_->size());
    for (const LabeledPoint& p : planars_ds) planar_split[p.label].push_back(p.position);

    for (ClassId l = 0; l < taxonomy_->size(); ++l) {
      edge_clouds_[l] = KdTree(std::move(edge_split[l]));
      planar_clouds_[l] = KdTree(std::move(planar_split[l]));
    }
  }

  int window_size_;
  const LabelTaxonomy* taxonomy_;
  std::deque<Frame> frames_;
  std::vector<KdTree> edge_clouds_;
  std::vector<KdTree> planar_clouds_;
};

}  // namespace semslam

#endif  // SEMSLAM_SUBMAP_HPP
