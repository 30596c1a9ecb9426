// semslam - semantic-assisted LiDAR odometry, loop closure and mapping
// SPDX-License-Identifier: Apache-2.0
//
// SE(3) pose graph over odometry and loop edges. The edge residual is
//   e_ij = log(Z_ij^-1 * T_i^-1 * T_j)
// and optimization is damped Gauss-Newton over right-multiplied twist
// increments of every non-fixed node, with analytic Jacobians and a sparse
// normal-equations solve. Node 0 anchors the gauge and is never touched.

#ifndef SEMSLAM_POSE_GRAPH_HPP
#define SEMSLAM_POSE_GRAPH_HPP

#include <Eigen/Sparse>

#include <ostream>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "semslam/se3.hpp"

namespace semslam {

struct PoseGraphEdge {
  int i = 0;
  int j = 0;
  Pose measurement;     // Z_ij, pose of j in i's frame
  double weight = 1.0;  // isotropic information
};

/// Residual of one edge; zero iff T_i^-1 T_j equals the measurement.
[[nodiscard]] inline Twist edgeError(const Pose& t_i, const Pose& t_j, const Pose& z_ij) {
  return se3Log(z_ij.inverse() * t_i.inverse() * t_j);
}

struct OptimizeStats {
  double chi2_initial = 0.0;
  double chi2_final = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> chi2_accepted;  // chi^2 after each accepted step
};

class PoseGraph {
 public:
  int addNode(const Pose& pose) {
    nodes_.push_back(pose);
    return static_cast<int>(nodes_.size()) - 1;
  }

  void addEdge(int i, int j, const Pose& measurement, double weight = 1.0) {
    if (i < 0 || j < 0 || i >= size() || j >= size() || i == j) {
      throw std::invalid_argument("PoseGraph: edge references invalid nodes");
    }
    edges_.push_back({i, j, measurement, weight});
  }

  [[nodiscard]] int size() const { return static_cast<int>(nodes_.size()); }
  [[nodiscard]] const Pose& node(int i) const { return nodes_.at(i); }
  [[nodiscard]] const std::vector<Pose>& nodes() const { return nodes_; }
  [[nodiscard]] const std::vector<PoseGraphEdge>& edges() const { return edges_; }

  void setNode(int i, const Pose& pose) { nodes_.at(i) = pose; }

  [[nodiscard]] double chi2() const {
    double sum = 0.0;
    for (const PoseGraphEdge& e : edges_) {
      sum += e.weight * edgeError(nodes_[e.i], nodes_[e.j], e.measurement).squaredNorm();
    }
    return sum;
  }

  /// Damped Gauss-Newton over all non-fixed nodes. Throws when some node is
  /// unreachable from node 0 (its update would be unconstrained).
  OptimizeStats optimize(int max_iterations = 50, double eps = 1e-9) {
    checkConnectivity();
    OptimizeStats stats;
    stats.chi2_initial = chi2();
    if (nodes_.size() < 2 || edges_.empty()) {
      stats.chi2_final = stats.chi2_initial;
      stats.converged = true;
      return stats;
    }

    const int n_free = size() - 1;  // node 0 holds the gauge
    double lambda = 1e-6;

    for (int iter = 0; iter < max_iterations; ++iter) {
      ++stats.iterations;
      const double cost0 = chi2();

      std::vector<Eigen::Triplet<double>> triplets;
      triplets.reserve(edges_.size() * 144);
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(6 * n_free);

      for (const PoseGraphEdge& e : edges_) {
        const Twist err = edgeError(nodes_[e.i], nodes_[e.j], e.measurement);
        const Mat6 jr_inv = se3RightJacobianInverse(err);
        const Mat6 j_j = jr_inv;
        const Mat6 j_i = -jr_inv * se3Adjoint(nodes_[e.j].inverse() * nodes_[e.i]);

        const auto addBlock = [&](int a, int b, const Mat6& block) {
          if (a == 0 || b == 0) return;
          const int ra = 6 * (a - 1), cb = 6 * (b - 1);
          for (int r = 0; r < 6; ++r) {
            for (int c = 0; c < 6; ++c) {
              triplets.emplace_back(ra + r, cb + c, e.weight * block(r, c));
            }
          }
        };
        addBlock(e.i, e.i, j_i.transpose() * j_i);
        addBlock(e.i, e.j, j_i.transpose() * j_j);
        addBlock(e.j, e.i, j_j.transpose() * j_i);
        addBlock(e.j, e.j, j_j.transpose() * j_j);
        if (e.i != 0) rhs.segment<6>(6 * (e.i - 1)) -= e.weight * j_i.transpose() * err;
        if (e.j != 0) rhs.segment<6>(6 * (e.j - 1)) -= e.weight * j_j.transpose() * err;
      }

      Eigen::SparseMatrix<double> h(6 * n_free, 6 * n_free);
      h.setFromTriplets(triplets.begin(), triplets.end());

      bool accepted = false;
      double step_norm = 0.0;
      for (int attempt = 0; attempt < 10; ++attempt) {
        Eigen::SparseMatrix<double> damped = h;
        for (int d = 0; d < 6 * n_free; ++d) damped.coeffRef(d, d) += lambda;

        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(damped);
        if (solver.info() != Eigen::Success) {
          lambda *= 10.0;
          continue;
        }
        const Eigen::VectorXd delta = solver.solve(rhs);

        const std::vector<Pose> backup = nodes_;
        for (int k = 1; k < size(); ++k) {
          nodes_[k] = nodes_[k] * se3Exp(delta.segment<6>(6 * (k - 1)));
        }
        const double cost1 = chi2();
        if (cost1 <= cost0) {
          lambda = std::max(lambda * 0.3, 1e-12);
          step_norm = delta.norm();
          stats.chi2_accepted.push_back(cost1);
          accepted = true;
          break;
        }
        nodes_ = backup;
        lambda *= 10.0;
      }

      if (!accepted) break;
      if (step_norm < eps) {
        stats.converged = true;
        break;
      }
    }

    stats.chi2_final = chi2();
    return stats;
  }

  /// g2o-style text export for cross-checking with external optimizers.
  void exportG2o(std::ostream& out) const {
    out.precision(12);
    for (int i = 0; i < size(); ++i) {
      const Eigen::Quaterniond q = nodes_[i].quaternion();
      const Eigen::Vector3d& t = nodes_[i].translation;
      out << "VERTEX_SE3:QUAT " << i << ' ' << t.x() << ' ' << t.y() << ' ' << t.z() << ' '
          << q.x() << ' ' << q.y() << ' ' << q.z() << ' ' << q.w() << '\n';
    }
    for (const PoseGraphEdge& e : edges_) {
      const Eigen::Quaterniond q = e.measurement.quaternion();
      const Eigen::Vector3d& t = e.measurement.translation;
      out << "EDGE_SE3:QUAT " << e.i << ' ' << e.j << ' ' << t.x() << ' ' << t.y() << ' '
          << t.z() << ' ' << q.x() << ' ' << q.y() << ' ' << q.z() << ' ' << q.w();
      // Isotropic information, upper triangular row-major.
      for (int r = 0; r < 6; ++r) {
        for (int c = r; c < 6; ++c) {
          out << ' ' << (r == c ? e.weight : 0.0);
        }
      }
      out << '\n';
    }
  }

 private:
  void checkConnectivity() const {
    if (nodes_.empty()) return;
    std::vector<std::vector<int>> adjacency(nodes_.size());
    for (const PoseGraphEdge& e : edges_) {
      adjacency[e.i].push_back(e.j);
      adjacency[e.j].push_back(e.i);
    }
    std::vector<bool> seen(nodes_.size(), false);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = true;
    while (!frontier.empty()) {
      const int cur = frontier.front();
      frontier.pop();
      for (int nb : adjacency[cur]) {
        if (!seen[nb]) {
          seen[nb] = true;
          frontier.push(nb);
        }
      }
    }
    std::string unreachable;
    for (int i = 0; i < size(); ++i) {
      if (!seen[i]) unreachable += ' ' + std::to_string(i);
    }
    if (!unreachable.empty()) {
      throw std::runtime_error("PoseGraph: nodes unreachable from the fixed node:" + unreachable);
    }
  }

  std::vector<Pose> nodes_;
  std::vector<PoseGraphEdge> edges_;
};

}  // namespace semslam

#endif  // SEMSLAM_POSE_GRAPH_HPP
