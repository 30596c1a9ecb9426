// semslam - semantic-assisted LiDAR odometry, loop closure and mapping
// SPDX-License-Identifier: Apache-2.0
//
// Trajectory evaluation: absolute trajectory error after rigid alignment
// (LiDAR is metric, so no scale), and KITTI-style relative pose errors over
// segments of 100..800 m of ground-truth arc length, with segment starts
// advancing every frame.

#ifndef SEMSLAM_METRICS_HPP
#define SEMSLAM_METRICS_HPP

#include <Eigen/Dense>

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "semslam/se3.hpp"

namespace semslam {

/// Rigid (rotation + translation) least-squares alignment of est onto gt.
[[nodiscard]] inline Pose alignTrajectories(const std::vector<Pose>& est,
                                            const std::vector<Pose>& gt) {
  if (est.size() != gt.size()) {
    throw std::invalid_argument("alignTrajectories: length mismatch (" +
                                std::to_string(est.size()) + " vs " + std::to_string(gt.size()) +
                                ")");
  }
  if (est.empty()) throw std::invalid_argument("alignTrajectories: empty trajectories");

  Eigen::Vector3d mean_e = Eigen::Vector3d::Zero(), mean_g = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < est.size(); ++i) {
    mean_e += est[i].translation;
    mean_g += gt[i].translation;
  }
  mean_e /= double(est.size());
  mean_g /= double(est.size());

  Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < est.size(); ++i) {
    cross += (est[i].translation - mean_e) * (gt[i].translation - mean_g).transpose();
  }
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross,
                                              Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d s = Eigen::Matrix3d::Identity();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) s(2, 2) = -1.0;

  Pose align;
  align.rotation = svd.matrixV() * s * svd.matrixU().transpose();
  align.translation = mean_g - align.rotation * mean_e;
  return align;
}

/// RMSE of translational residuals after rigid alignment.
[[nodiscard]] inline double ate(const std::vector<Pose>& est, const std::vector<Pose>& gt) {
  const Pose align = alignTrajectories(est, gt);
  double sum = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    sum += (align * est[i].translation - gt[i].translation).squaredNorm();
  }
  return std::sqrt(sum / double(est.size()));
}

struct RpeResult {
  double trans_percent = 0.0;       // mean over all segments
  double rot_deg_per_100m = 0.0;
  bool sufficient_length = false;   // any segment evaluated at all
  struct PerLength {
    double length = 0.0;
    double trans_percent = 0.0;
    double rot_deg_per_100m = 0.0;
    int segments = 0;
  };
  std::vector<PerLength> breakdown;
};

[[nodiscard]] inline std::vector<double> defaultRpeSegmentLengths() {
  return {100, 200, 300, 400, 500, 600, 700, 800};
}

/// KITTI-style relative pose error: for every start frame and segment
/// length reachable along the ground-truth arc, the relative-pose
/// discrepancy normalized by the nominal length.
[[nodiscard]] inline RpeResult kittiRpe(
    const std::vector<Pose>& est, const std::vector<Pose>& gt,
    const std::vector<double>& lengths = defaultRpeSegmentLengths()) {
  if (est.size() != gt.size()) {
    throw std::invalid_argument("kittiRpe: length mismatch");
  }
  RpeResult result;
  if (est.size() < 2) return result;

  std::vector<double> dist(gt.size(), 0.0);
  for (std::size_t i = 1; i < gt.size(); ++i) {
    dist[i] = dist[i - 1] + (gt[i].translation - gt[i - 1].translation).norm();
  }

  double total_t = 0.0, total_r = 0.0;
  int total_n = 0;
  for (double len : lengths) {
    double sum_t = 0.0, sum_r = 0.0;
    int count = 0;
    std::size_t last = 0;
    for (std::size_t first = 0; first < gt.size(); ++first) {
      if (last < first) last = first;
      while (last < gt.size() && dist[last] - dist[first] < len) ++last;
      if (last >= gt.size()) break;

      const Pose gt_delta = gt[first].inverse() * gt[last];
      const Pose est_delta = est[first].inverse() * est[last];
      const Pose err = gt_delta.inverse() * est_delta;
      sum_t += err.translation.norm() / len;
      sum_r += err.rotationAngle() / len;
      ++count;
    }
    if (count > 0) {
      result.breakdown.push_back({len, 100.0 * sum_t / count,
                                  (sum_r / count) * (180.0 / M_PI) * 100.0, count});
      total_t += sum_t;
      total_r += sum_r;
      total_n += count;
    }
  }

  if (total_n > 0) {
    result.sufficient_length = true;
    result.trans_percent = 100.0 * total_t / total_n;
    result.rot_deg_per_100m = (total_r / total_n) * (180.0 / M_PI) * 100.0;
  }
  return result;
}

struct EvalReport {
  double ate_rmse = 0.0;
  RpeResult rpe;
  bool has_rpe = false;
};

[[nodiscard]] inline EvalReport evaluateTrajectories(const std::vector<Pose>& est,
                                                     const std::vector<Pose>& gt) {
  EvalReport report;
  report.ate_rmse = ate(est, gt);
  report.rpe = kittiRpe(est, gt);
  report.has_rpe = report.rpe.sufficient_length;
  return report;
}

inline void writeReportText(const EvalReport& r, std::ostream& out) {
  out << "ATE RMSE: " << r.ate_rmse << " m\n";
  if (!r.has_rpe) {
    out << "RPE: insufficient trajectory length (no 100 m segment)\n";
    return;
  }
  out << "RPE translation: " << r.rpe.trans_percent << " %\n";
  out << "RPE rotation: " << r.rpe.rot_deg_per_100m << " deg/100m\n";
  for (const auto& b : r.rpe.breakdown) {
    out << "  " << b.length << " m: " << b.trans_percent << " % | " << b.rot_deg_per_100m
        << " deg/100m (" << b.segments << " segments)\n";
  }
}

inline void writeReportKeyValue(const EvalReport& r, std::ostream& out) {
  out << "ate_rmse_m " << r.ate_rmse << '\n';
  out << "rpe_valid " << (r.has_rpe ? 1 : 0) << '\n';
  if (r.has_rpe) {
    out << "rpe_trans_percent " << r.rpe.trans_percent << '\n';
    out << "rpe_rot_deg_per_100m " << r.rpe.rot_deg_per_100m << '\n';
    for (const auto& b : r.rpe.breakdown) {
      out << "rpe_trans_percent_" << int(b.length) << ' ' << b.trans_percent << '\n';
      out << "rpe_rot_deg_per_100m_" << int(b.length) << ' ' << b.rot_deg_per_100m << '\n';
    }
  }
}

}  // namespace semslam

#endif  // SEMSLAM_METRICS_HPP
