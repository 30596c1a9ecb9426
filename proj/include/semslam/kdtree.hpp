// semslam - semantic-assisted LiDAR odometry, loop closure and mapping
// SPDX-License-Identifier: Apache-2.0
//
// A median-split kd-tree over 3D points with exact k-nearest-neighbor
// queries. Ties are resolved toward the smaller point index so a query
// has exactly one right answer.

#ifndef SEMSLAM_KDTREE_HPP
#define SEMSLAM_KDTREE_HPP

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

namespace semslam {

struct Neighbor {
  std::uint32_t index = 0;
  double dist2 = std::numeric_limits<double>::infinity();
};

class KdTree {
 public:
  KdTree() = default;

  explicit KdTree(std::vector<Eigen::Vector3d> points) : points_(std::move(points)) {
    if (points_.empty()) return;
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    root_ = build(0, static_cast<std::uint32_t>(points_.size()));
  }

  [[nodiscard]] bool empty() const { return points_.empty(); }
  [[nodiscard]] std::size_t size() const { return points_.size(); }
  [[nodiscard]] const Eigen::Vector3d& point(std::uint32_t i) const { return points_[i]; }

  /// The k nearest points to `query`, ordered by (distance, index).
  /// Returns fewer than k when the tree is smaller than k.
  [[nodiscard]] std::vector<Neighbor> knn(const Eigen::Vector3d& query, std::size_t k) const {
    std::vector<Neighbor> heap;  // max-heap on (dist2, index)
    if (k == 0 || points_.empty()) return heap;
    heap.reserve(k + 1);
    search(root_, query, k, heap);
    std::sort_heap(heap.begin(), heap.end(), heapLess);
    return heap;
  }

 private:
  static constexpr std::uint32_t kLeafSize = 8;
  static constexpr std::uint32_t kInvalid = 0xFFFFFFFFu;

  struct Node {
    double split = 0.0;
    std::uint32_t axis = 0;
    std::uint32_t left = kInvalid, right = kInvalid;
    std::uint32_t begin = 0, end = 0;  // leaf payload range in order_
    [[nodiscard]] bool isLeaf() const { return left == kInvalid; }
  };

  static bool heapLess(const Neighbor& a, const Neighbor& b) {
    if (a.dist2 != b.dist2) return a.dist2 < b.dist2;
    return a.index < b.index;
  }

  std::uint32_t build(std::uint32_t begin, std::uint32_t end) {
    Node node;
    if (end - begin <= kLeafSize) {
      node.begin = begin;
      node.end = end;
      nodes_.push_back(node);
      return static_cast<std::uint32_t>(nodes_.size() - 1);
    }

    Eigen::Vector3d lo = points_[order_[begin]], hi = lo;
    for (std::uint32_t i = begin + 1; i < end; ++i) {
      lo = lo.cwiseMin(points_[order_[i]]);
      hi = hi.cwiseMax(points_[order_[i]]);
    }
    Eigen::Index axis;
    (hi - lo).maxCoeff(&axis);

    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                       return points_[a][axis] < points_[b][axis];
                     });

    node.axis = static_cast<std::uint32_t>(axis);
    node.split = points_[order_[mid]][axis];
    nodes_.push_back(node);
    const std::uint32_t id = static_cast<std::uint32_t>(nodes_.size() - 1);
    const std::uint32_t left = build(begin, mid);
    const std::uint32_t right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  void search(std::uint32_t node_id, const Eigen::Vector3d& q, std::size_t k,
              std::vector<Neighbor>& heap) const {
    const Node& node = nodes_[node_id];
    if (node.isLeaf()) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t idx = order_[i];
        const Neighbor cand{idx, (points_[idx] - q).squaredNorm()};
        if (heap.size() < k) {
          heap.push_back(cand);
          std::push_heap(heap.begin(), heap.end(), heapLess);
        } else if (heapLess(cand, heap.front())) {
          std::pop_heap(heap.begin(), heap.end(), heapLess);
          heap.back() = cand;
          std::push_heap(heap.begin(), heap.end(), heapLess);
        }
      }
      return;
    }

    const double delta = q[node.axis] - node.split;
    const std::uint32_t near = delta < 0.0 ? node.left : node.right;
    const std::uint32_t far = delta < 0.0 ? node.right : node.left;
    search(near, q, k, heap);
    if (heap.size() < k || delta * delta <= heap.front().dist2) {
      search(far, q, k, heap);
    }
  }

  std::vector<Eigen::Vector3d> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::uint32_t root_ = 0;
};

/// Reference k-nearest-neighbor by exhaustive scan; the oracle the tree is
/// tested against.
[[nodiscard]] inline std::vector<Neighbor> bruteForceKnn(
    const std::vector<Eigen::Vector3d>& points, const Eigen::Vector3d& query, std::size_t k) {
  std::vector<Neighbor> all(points.size());
  for (std::uint32_t i = 0; i < points.size(); ++i) {
    all[i] = {i, (points[i] - query).squaredNorm()};
  }
  std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.dist2 != b.dist2) return a.dist2 < b.dist2;
    return a.index < b.index;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

}  // namespace semslam

#endif  // SEMSLAM_KDTREE_HPP
