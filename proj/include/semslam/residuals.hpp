// semslam - semantic-assisted LiDAR odometry, loop closure and mapping
// SPDX-License-Identifier: Apache-2.0
//
// Registration residuals: point-to-line and point-to-plane distances, the
// eigen-decomposition fits behind them, and their analytic derivatives with
// respect to a left-multiplied twist increment.

#ifndef SEMSLAM_RESIDUALS_HPP
#define SEMSLAM_RESIDUALS_HPP

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "semslam/labels.hpp"
#include "semslam/se3.hpp"

namespace semslam {

/// Distance from c to the line through m1 and m2:
///   |(c - m1) x (c - m2)| / |m1 - m2|
[[nodiscard]] inline double pointToLineDistance(const Eigen::Vector3d& c,
                                                const Eigen::Vector3d& m1,
                                                const Eigen::Vector3d& m2) {
  const double base = (m1 - m2).norm();
  if (base < 1e-9) throw std::invalid_argument("pointToLineDistance: coincident support points");
  return (c - m1).cross(c - m2).norm() / base;
}

/// Unsigned distance from c to the plane through m1, m2, m3:
///   |(c - m1)^T ((m1 - m2) x (m1 - m3))| / |(m1 - m2) x (m1 - m3)|
[[nodiscard]] inline double pointToPlaneDistance(const Eigen::Vector3d& c,
                                                 const Eigen::Vector3d& m1,
                                                 const Eigen::Vector3d& m2,
                                                 const Eigen::Vector3d& m3) {
  const Eigen::Vector3d n = (m1 - m2).cross(m1 - m3);
  const double norm = n.norm();
  if (norm < 1e-9) throw std::invalid_argument("pointToPlaneDistance: collinear support points");
  return std::abs((c - m1).dot(n)) / norm;
}

struct FittedLine {
  Eigen::Vector3d point;      // centroid of the support points
  Eigen::Vector3d direction;  // unit principal direction
};

struct FittedPlane {
  Eigen::Vector3d point;   // centroid of the support points
  Eigen::Vector3d normal;  // unit normal
};

/// Principal-direction line fit. Empty when the scatter is not line-like
/// (largest eigenvalue under `min_eigen_ratio` times the middle one).
[[nodiscard]] inline std::optional<FittedLine> fitLine(const std::vector<Eigen::Vector3d>& pts,
                                                       double min_eigen_ratio = 3.0) {
  if (pts.size() < 2) return std::nullopt;
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= double(pts.size());

  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) {
    const Eigen::Vector3d d = p - centroid;
    scatter += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(scatter);  // ascending eigenvalues
  const double largest = es.eigenvalues()[2];
  const double middle = es.eigenvalues()[1];
  if (largest < 1e-18) return std::nullopt;  // all points coincide
  if (largest < min_eigen_ratio * middle) return std::nullopt;
  return FittedLine{centroid, es.eigenvectors().col(2)};
}

/// Least-squares plane with a semantic orientation gate: ground-like classes
/// must face up, wall-like classes must face sideways, within
/// `normal_tolerance_deg`. Degenerate scatter (smallest eigenvalue above
/// `max_flatness_ratio` times the middle one) is rejected too.
[[nodiscard]] inline std::optional<FittedPlane> fitPlaneConstrained(
    const std::vector<Eigen::Vector3d>& pts, OrientationPrior prior, double normal_tolerance_deg,
    double max_flatness_ratio = 0.1) {
  if (pts.size() < 3) return std::nullopt;
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= double(pts.size());

  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) {
    const Eigen::Vector3d d = p - centroid;
    scatter += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(scatter);
  const double smallest = es.eigenvalues()[0];
  const double middle = es.eigenvalues()[1];
  if (middle < 1e-18) return std::nullopt;  // collinear support
  if (smallest > max_flatness_ratio * middle) return std::nullopt;

  const Eigen::Vector3d normal = es.eigenvectors().col(0);
  const double tol = normal_tolerance_deg * M_PI / 180.0;
  const double nz = std::abs(normal.z());
  if (prior == OrientationPrior::kGround && nz < std::cos(tol)) return std::nullopt;
  if (prior == OrientationPrior::kWall && nz > std::sin(tol)) return std::nullopt;
  return FittedPlane{centroid, normal};
}

/// Residual value and 1x6 Jacobian with respect to the twist d of a
/// left-multiplied increment exp(d) * y, evaluated at d = 0. y is the
/// already transformed feature point in the map frame.
struct ResidualJacobian {
  double value = 0.0;
  Eigen::Matrix<double, 1, 6> jacobian = Eigen::Matrix<double, 1, 6>::Zero();
};

namespace detail {

/// d(exp(d) * y)/dd at d = 0 in [omega; rho] ordering: [-[y]x | I].
[[nodiscard]] inline Eigen::Matrix<double, 3, 6> pointTwistJacobian(const Eigen::Vector3d& y) {
  Eigen::Matrix<double, 3, 6> j;
  j.block<3, 3>(0, 0) = -skew(y);
  j.block<3, 3>(0, 3) = Eigen::Matrix3d::Identity();
  return j;
}

}  // namespace detail

/// Point-to-line residual |(y - p0) x u| for a fitted line (p0, u).
[[nodiscard]] inline ResidualJacobian lineResidual(const Eigen::Vector3d& y,
                                                   const FittedLine& line) {
  const Eigen::Vector3d w = (y - line.point).cross(line.direction);
  const double d = w.norm();
  ResidualJacobian out;
  out.value = d;
  if (d < 1e-12) return out;  // gradient undefined at zero; residual contributes nothing
  const Eigen::Matrix<double, 1, 3> dd_dy = (w / d).transpose() * (-skew(line.direction));
  out.jacobian = dd_dy * detail::pointTwistJacobian(y);
  return out;
}

/// Point-to-plane residual |(y - p0) . n| for a fitted plane (p0, n).
[[nodiscard]] inline ResidualJacobian planeResidual(const Eigen::Vector3d& y,
                                                    const FittedPlane& plane) {
  const double s = (y - plane.point).dot(plane.normal);
  ResidualJacobian out;
  out.value = std::abs(s);
  const double sign = s >= 0.0 ? 1.0 : -1.0;
  out.jacobian = sign * plane.normal.transpose() * detail::pointTwistJacobian(y);
  return out;
}

}  // namespace semslam

#endif  // SEMSLAM_RESIDUALS_HPP
