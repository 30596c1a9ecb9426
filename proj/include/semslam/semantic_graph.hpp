// semslam - semantic-assisted LiDAR odometry, loop closure and mapping
// SPDX-License-Identifier: Apache-2.0
//
// Compact per-scan semantic graphs: class-wise single-linkage clusters
// reduced to labeled centroids, at most 100 nodes per scan. A graph is the
// unit of place recognition; serialized it stays within the 100x4-float
// budget (x, y, z float32 + uint16 label per node).

#ifndef SEMSLAM_SEMANTIC_GRAPH_HPP
#define SEMSLAM_SEMANTIC_GRAPH_HPP

#include <algorithm>
#include <cstring>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "semslam/downsample.hpp"
#include "semslam/scan.hpp"
#include "semslam/se3.hpp"

namespace semslam {

inline constexpr std::size_t kMaxGraphNodes = 100;

struct GraphNode {
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();  // scan frame
  ClassId label = 0;
  std::uint32_t point_count = 0;
};

struct SemanticGraph {
  std::vector<GraphNode> nodes;  // descending point_count, ties by centroid
  int scan_index = -1;

  [[nodiscard]] bool empty() const { return nodes.empty(); }
};

namespace detail {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0u);
  }
  std::uint32_t find(std::uint32_t a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::uint32_t> parent_;
};

/// Single-linkage Euclidean clustering through a radius-sized grid hash;
/// only same-cell and forward-neighbor cells are distance-checked.
[[nodiscard]] inline std::vector<std::vector<std::uint32_t>> clusterByRadius(
    const std::vector<Eigen::Vector3d>& pts, double radius) {
  std::vector<std::vector<std::uint32_t>> clusters;
  if (pts.empty()) return clusters;

  std::unordered_map<VoxelKey, std::vector<std::uint32_t>, VoxelKeyHash> grid;
  for (std::uint32_t i = 0; i < pts.size(); ++i) {
    grid[voxelOf(pts[i], radius)].push_back(i);
  }

  UnionFind uf(pts.size());
  const double r2 = radius * radius;
  for (const auto& [key, cell] : grid) {
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dz = -1; dz <= 1; ++dz) {
          const VoxelKey nb{key.x + dx, key.y + dy, key.z + dz};
          const auto it = grid.find(nb);
          if (it == grid.end()) continue;
          for (std::uint32_t a : cell) {
            for (std::uint32_t b : it->second) {
              if (b <= a) continue;
              if ((pts[a] - pts[b]).squaredNorm() <= r2) uf.unite(a, b);
            }
          }
        }
      }
    }
  }

  std::unordered_map<std::uint32_t, std::uint32_t> root_to_cluster;
  for (std::uint32_t i = 0; i < pts.size(); ++i) {
    const std::uint32_t root = uf.find(i);
    auto [it, inserted] = root_to_cluster.try_emplace(root, std::uint32_t(clusters.size()));
    if (inserted) clusters.emplace_back();
    clusters[it->second].push_back(i);
  }
  return clusters;
}

}  // namespace detail

/// Clusters a labeled scan class-by-class and keeps the `kMaxGraphNodes`
/// largest clusters as centroid nodes. Ground-like classes are skipped
/// (one giant ground cluster has no landmark value). Cluster radii come
/// from the taxonomy.
[[nodiscard]] inline SemanticGraph buildGraph(const SemanticScan& scan,
                                              const LabelTaxonomy& taxonomy,
                                              std::uint32_t min_cluster_size = 10,
                                              int scan_index = -1) {
  SemanticGraph graph;
  graph.scan_index = scan_index;

  std::vector<std::vector<Eigen::Vector3d>> by_class(taxonomy.size());
  for (const SemanticPoint& p : scan.points) {
    if (!taxonomy.spec(p.label).graph_eligible) continue;
    by_class[p.label].push_back(p.position);
  }

  for (ClassId label = 0; label < taxonomy.size(); ++label) {
    const auto& pts = by_class[label];
    if (pts.empty()) continue;
    const auto clusters = detail::clusterByRadius(pts, taxonomy.spec(label).cluster_radius);
    for (const auto& cluster : clusters) {
      if (cluster.size() < min_cluster_size) continue;
      Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
      for (std::uint32_t i : cluster) centroid += pts[i];
      centroid /= double(cluster.size());
      graph.nodes.push_back({centroid, label, std::uint32_t(cluster.size())});
    }
  }

  std::sort(graph.nodes.begin(), graph.nodes.end(), [](const GraphNode& a, const GraphNode& b) {
    if (a.point_count != b.point_count) return a.point_count > b.point_count;
    if (a.centroid.x() != b.centroid.x()) return a.centroid.x() < b.centroid.x();
    if (a.centroid.y() != b.centroid.y()) return a.centroid.y() < b.centroid.y();
    return a.centroid.z() < b.centroid.z();
  });
  if (graph.nodes.size() > kMaxGraphNodes) graph.nodes.resize(kMaxGraphNodes);
  return graph;
}

/// Binary node records: count, then (x, y, z float32, label uint16) each.
[[nodiscard]] inline std::vector<std::byte> serializeGraph(const SemanticGraph& graph) {
  std::vector<std::byte> out;
  const std::uint16_t count = std::uint16_t(graph.nodes.size());
  out.resize(sizeof(count) + graph.nodes.size() * 14);
  std::memcpy(out.data(), &count, sizeof(count));
  std::size_t offset = sizeof(count);
  for (const GraphNode& n : graph.nodes) {
    const float xyz[3] = {float(n.centroid.x()), float(n.centroid.y()), float(n.centroid.z())};
    std::memcpy(out.data() + offset, xyz, 12);
    std::memcpy(out.data() + offset + 12, &n.label, 2);
    offset += 14;
  }
  return out;
}

[[nodiscard]] inline SemanticGraph deserializeGraph(const std::vector<std::byte>& bytes) {
  if (bytes.size() < 2) throw std::runtime_error("graph record too short");
  std::uint16_t count = 0;
  std::memcpy(&count, bytes.data(), 2);
  if (bytes.size() != 2 + std::size_t(count) * 14) {
    throw std::runtime_error("graph record size mismatch");
  }
  SemanticGraph graph;
  graph.nodes.resize(count);
  std::size_t offset = 2;
  for (GraphNode& n : graph.nodes) {
    float xyz[3];
    std::memcpy(xyz, bytes.data() + offset, 12);
    std::memcpy(&n.label, bytes.data() + offset + 12, 2);
    n.centroid = Eigen::Vector3d(xyz[0], xyz[1], xyz[2]);
    offset += 14;
  }
  return graph;
}

/// Append-only store of (scan index, graph, pose at insertion).
class GraphMap {
 public:
  struct Entry {
    int scan_index;
    SemanticGraph graph;
    Pose pose;
  };

  void append(SemanticGraph graph, const Pose& pose) {
    if (!entries_.empty() && graph.scan_index <= entries_.back().scan_index) {
      throw std::invalid_argument("GraphMap: scan indices must be strictly increasing");
    }
    const int idx = graph.scan_index;
    entries_.push_back({idx, std::move(graph), pose});
    index_of_[idx] = entries_.size() - 1;
  }

  [[nodiscard]] bool contains(int scan_index) const { return index_of_.count(scan_index) != 0; }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }

  [[nodiscard]] const Entry& get(int scan_index) const {
    const auto it = index_of_.find(scan_index);
    if (it == index_of_.end()) {
      throw std::out_of_range("GraphMap: no entry for scan " + std::to_string(scan_index));
    }
    return entries_[it->second];
  }

  /// Entries for the requested indices, in request order.
  [[nodiscard]] std::vector<const Entry*> get(const std::vector<int>& scan_indices) const {
    std::vector<const Entry*> out;
    out.reserve(scan_indices.size());
    for (int idx : scan_indices) out.push_back(&get(idx));
    return out;
  }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<int, std::size_t> index_of_;
};

}  // namespace semslam

#endif  // SEMSLAM_SEMANTIC_GRAPH_HPP
