// semslam - semantic-assisted LiDAR odometry, loop closure and mapping
// SPDX-License-Identifier: Apache-2.0
//
// SE(3) rigid transforms and the tangent-space (twist) parametrization
// used by the registration and pose-graph solvers.

#ifndef SEMSLAM_SE3_HPP
#define SEMSLAM_SE3_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <stdexcept>

namespace semslam {

/// Tangent-space parametrization: [rx, ry, rz, tx, ty, tz], rotation first.
using Twist = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

[[nodiscard]] inline Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  // clang-format off
  s <<    0.0, -v.z(),  v.y(),
        v.z(),    0.0, -v.x(),
       -v.y(),  v.x(),    0.0;
  // clang-format on
  return s;
}

/// SO(3) exponential map (Rodrigues).
[[nodiscard]] inline Eigen::Matrix3d so3Exp(const Eigen::Vector3d& omega) {
  const double theta = omega.norm();
  const Eigen::Matrix3d w = skew(omega);
  if (theta < 1e-10) {
    return Eigen::Matrix3d::Identity() + w + 0.5 * w * w;
  }
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / (theta * theta);
  return Eigen::Matrix3d::Identity() + a * w + b * w * w;
}

/// SO(3) logarithmic map. Throws std::domain_error for angles >= pi - 1e-6;
/// the solvers never need that regime and a silently inaccurate axis is
/// worse than a hard failure.
[[nodiscard]] inline Eigen::Vector3d so3Log(const Eigen::Matrix3d& R) {
  const Eigen::Vector3d half_vee(0.5 * (R(2, 1) - R(1, 2)),
                                 0.5 * (R(0, 2) - R(2, 0)),
                                 0.5 * (R(1, 0) - R(0, 1)));
  const double cos_theta = 0.5 * (R.trace() - 1.0);
  const double theta = std::atan2(half_vee.norm(), cos_theta);
  if (theta >= M_PI - 1e-6) {
    throw std::domain_error("so3Log: rotation angle too close to pi");
  }
  if (theta < 1e-10) {
    return half_vee;  // first-order: vee(R - R^T)/2
  }
  return (theta / std::sin(theta)) * half_vee;
}

/// Left Jacobian of SO(3).
[[nodiscard]] inline Eigen::Matrix3d so3LeftJacobian(const Eigen::Vector3d& omega) {
  const double theta = omega.norm();
  const Eigen::Matrix3d w = skew(omega);
  if (theta < 1e-5) {
    return Eigen::Matrix3d::Identity() + 0.5 * w + (1.0 / 6.0) * w * w;
  }
  const double t2 = theta * theta;
  const double b = (1.0 - std::cos(theta)) / t2;
  const double c = (theta - std::sin(theta)) / (t2 * theta);
  return Eigen::Matrix3d::Identity() + b * w + c * w * w;
}

/// Inverse of the left Jacobian of SO(3).
[[nodiscard]] inline Eigen::Matrix3d so3LeftJacobianInverse(const Eigen::Vector3d& omega) {
  const double theta = omega.norm();
  const Eigen::Matrix3d w = skew(omega);
  if (theta < 1e-5) {
    return Eigen::Matrix3d::Identity() - 0.5 * w + (1.0 / 12.0) * w * w;
  }
  const double t2 = theta * theta;
  const double c = 1.0 / t2 - (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  return Eigen::Matrix3d::Identity() - 0.5 * w + c * w * w;
}

/// Rigid transform in SE(3). Rotation is stored as a matrix so residual
/// Jacobians can use it directly; quaternions appear only at I/O boundaries.
/// Immutable by convention: operations return new values.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  [[nodiscard]] static Pose identity() { return {}; }

  [[nodiscard]] static Pose fromQuaternion(const Eigen::Quaterniond& q,
                                           const Eigen::Vector3d& t) {
    return {q.normalized().toRotationMatrix(), t};
  }

  [[nodiscard]] Eigen::Quaterniond quaternion() const {
    return Eigen::Quaterniond(rotation);
  }

  [[nodiscard]] Pose inverse() const {
    return {rotation.transpose(), -(rotation.transpose() * translation)};
  }

  /// Group composition: (this * other) applies `other` first.
  [[nodiscard]] Pose operator*(const Pose& other) const {
    return {rotation * other.rotation, rotation * other.translation + translation};
  }

  [[nodiscard]] Eigen::Vector3d operator*(const Eigen::Vector3d& x) const {
    return rotation * x + translation;
  }

  [[nodiscard]] double rotationAngle() const {
    const double c = std::clamp(0.5 * (rotation.trace() - 1.0), -1.0, 1.0);
    return std::acos(c);
  }
};

[[nodiscard]] inline Pose compose(const Pose& a, const Pose& b) { return a * b; }

[[nodiscard]] inline Eigen::Vector3d transformPoint(const Pose& p, const Eigen::Vector3d& x) {
  return p * x;
}

/// SE(3) exponential map.
[[nodiscard]] inline Pose se3Exp(const Twist& xi) {
  const Eigen::Vector3d omega = xi.head<3>();
  const Eigen::Vector3d rho = xi.tail<3>();
  return {so3Exp(omega), so3LeftJacobian(omega) * rho};
}

/// SE(3) logarithmic map; inherits so3Log's near-pi rejection.
[[nodiscard]] inline Twist se3Log(const Pose& p) {
  const Eigen::Vector3d omega = so3Log(p.rotation);
  Twist xi;
  xi.head<3>() = omega;
  xi.tail<3>() = so3LeftJacobianInverse(omega) * p.translation;
  return xi;
}

/// Adjoint of SE(3) in [omega; rho] ordering:
///   Ad(T) = [ R      0 ]
///           [ [t]x R R ]
[[nodiscard]] inline Mat6 se3Adjoint(const Pose& p) {
  Mat6 ad = Mat6::Zero();
  ad.block<3, 3>(0, 0) = p.rotation;
  ad.block<3, 3>(3, 0) = skew(p.translation) * p.rotation;
  ad.block<3, 3>(3, 3) = p.rotation;
  return ad;
}

namespace detail {

// Q block of the SE(3) left Jacobian (Barfoot), [omega; rho] ordering.
[[nodiscard]] inline Eigen::Matrix3d se3JacobianQ(const Eigen::Vector3d& omega,
                                                  const Eigen::Vector3d& rho) {
  const Eigen::Matrix3d w = skew(omega);
  const Eigen::Matrix3d r = skew(rho);
  const double theta = omega.norm();

  double c1, c2, c3;
  if (theta < 1e-4) {
    c1 = 1.0 / 6.0;
    c2 = 1.0 / 24.0;
    c3 = 1.0 / 120.0;
  } else {
    const double t2 = theta * theta;
    const double t4 = t2 * t2;
    const double st = std::sin(theta);
    const double ct = std::cos(theta);
    c1 = (theta - st) / (t2 * theta);
    c2 = (1.0 - 0.5 * t2 - ct) / t4;
    c3 = 0.5 * (c2 - 3.0 * (theta - st - t2 * theta / 6.0) / (t4 * theta));
  }

  return 0.5 * r + c1 * (w * r + r * w + w * r * w) -
         c2 * (w * w * r + r * w * w - 3.0 * w * r * w) -
         c3 * (w * r * w * w + w * w * r * w);
}

}  // namespace detail

/// Inverse of the SE(3) left Jacobian at xi.
[[nodiscard]] inline Mat6 se3LeftJacobianInverse(const Twist& xi) {
  const Eigen::Vector3d omega = xi.head<3>();
  const Eigen::Vector3d rho = xi.tail<3>();
  const Eigen::Matrix3d jinv = so3LeftJacobianInverse(omega);
  const Eigen::Matrix3d q = detail::se3JacobianQ(omega, rho);
  Mat6 out = Mat6::Zero();
  out.block<3, 3>(0, 0) = jinv;
  out.block<3, 3>(3, 0) = -jinv * q * jinv;
  out.block<3, 3>(3, 3) = jinv;
  return out;
}

/// Inverse of the SE(3) right Jacobian at xi; satisfies
/// log(exp(xi) * exp(d)) = xi + rightJacobianInverse(xi) * d + O(|d|^2).
[[nodiscard]] inline Mat6 se3RightJacobianInverse(const Twist& xi) {
  return se3LeftJacobianInverse(-xi);
}

}  // namespace semslam

#endif  // SEMSLAM_SE3_HPP
