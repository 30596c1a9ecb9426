// semslam - semantic-assisted LiDAR odometry, loop closure and mapping
// SPDX-License-Identifier: Apache-2.0
//
// KITTI velodyne/label ingestion and KITTI pose-file round-tripping.
// Scans: packed float32 x4 (x, y, z, intensity), little-endian.
// Labels: packed uint32 per point, semantic class id in the low 16 bits.
// Poses: 12 numbers per line, the row-major upper 3x4 of the pose matrix.

#ifndef SEMSLAM_KITTI_IO_HPP
#define SEMSLAM_KITTI_IO_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "semslam/scan.hpp"
#include "semslam/se3.hpp"

namespace semslam {

struct ScanReaderConfig {
  double min_range = 2.0;    // self-returns below this are dropped
  double max_range = 120.0;  // noise floor beyond this
  int num_rings = 64;
  double fov_down_deg = -24.9;  // HDL-64E vertical field of view
  double fov_up_deg = 2.0;
};

namespace detail {

[[nodiscard]] inline std::vector<char> readBinaryFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  const std::streamsize size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<char> buffer(static_cast<std::size_t>(size));
  if (size > 0 && !in.read(buffer.data(), size)) {
    throw std::runtime_error("short read: " + path);
  }
  return buffer;
}

/// Buckets a vertical angle into one of num_rings equal bins over the
/// sensor field of view. Returns -1 for points outside the FOV.
[[nodiscard]] inline int deriveRing(const Eigen::Vector3d& p, const ScanReaderConfig& cfg) {
  const double angle = std::atan2(p.z(), std::hypot(p.x(), p.y())) * 180.0 / M_PI;
  const double span = cfg.fov_up_deg - cfg.fov_down_deg;
  const double rel = (angle - cfg.fov_down_deg) / span;
  if (rel < 0.0 || rel > 1.0) return -1;
  const int ring = static_cast<int>(rel * cfg.num_rings);
  return ring >= cfg.num_rings ? cfg.num_rings - 1 : ring;
}

}  // namespace detail

/// Reads one scan from a velodyne .bin plus its SemanticKITTI .label file,
/// keeping only points of retained classes within the range bounds.
/// Ring indices are derived geometrically (KITTI bins carry no ring field).
[[nodiscard]] inline SemanticScan readScan(const std::string& bin_path,
                                           const std::string& label_path,
                                           const LabelTaxonomy& taxonomy,
                                           const ScanReaderConfig& cfg = {}) {
  const std::vector<char> bin = detail::readBinaryFile(bin_path);
  const std::vector<char> labels = detail::readBinaryFile(label_path);

  if (bin.size() % (4 * sizeof(float)) != 0) {
    throw std::runtime_error("scan file size is not a multiple of 16 bytes: " + bin_path);
  }
  const std::size_t n_points = bin.size() / (4 * sizeof(float));
  const std::size_t n_labels = labels.size() / sizeof(std::uint32_t);
  if (labels.size() % sizeof(std::uint32_t) != 0 || n_points != n_labels) {
    throw std::runtime_error("point/label count mismatch: " + bin_path + " has " +
                             std::to_string(n_points) + " points, " + label_path + " has " +
                             std::to_string(n_labels) + " labels");
  }

  const float* pts = reinterpret_cast<const float*>(bin.data());
  const std::uint32_t* words = reinterpret_cast<const std::uint32_t*>(labels.data());

  SemanticScan scan;
  scan.points.reserve(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    const std::uint32_t mapped = taxonomy.mapRaw(words[i] & 0xFFFFu);
    if (mapped == kDiscard) continue;

    SemanticPoint p;
    p.position = Eigen::Vector3d(pts[4 * i], pts[4 * i + 1], pts[4 * i + 2]);
    p.range = p.position.norm();
    if (p.range < cfg.min_range || p.range > cfg.max_range) continue;
    p.ring = detail::deriveRing(p.position, cfg);
    if (p.ring < 0) continue;
    p.label = static_cast<ClassId>(mapped);
    scan.points.push_back(p);
  }
  return scan;
}

inline void writeTrajectory(const std::vector<Pose>& poses, std::ostream& out) {
  out << std::setprecision(12);
  for (const Pose& p : poses) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 4; ++c) {
        if (r != 0 || c != 0) out << ' ';
        out << (c < 3 ? p.rotation(r, c) : p.translation(r));
      }
    }
    out << '\n';
  }
}

inline void writeTrajectory(const std::vector<Pose>& poses, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  writeTrajectory(poses, out);
}

[[nodiscard]] inline std::vector<Pose> readTrajectory(std::istream& in) {
  std::vector<Pose> poses;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    double v[12];
    int got = 0;
    while (got < 12 && (ss >> v[got])) ++got;
    double extra;
    if (got == 0 && line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (got != 12 || (ss >> extra)) {
      throw std::runtime_error("trajectory line " + std::to_string(line_no) +
                               ": expected 12 numbers");
    }
    Pose p;
    p.rotation << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
    p.translation << v[3], v[7], v[11];
    poses.push_back(p);
  }
  return poses;
}

[[nodiscard]] inline std::vector<Pose> readTrajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trajectory file: " + path);
  return readTrajectory(in);
}

}  // namespace semslam

#endif  // SEMSLAM_KITTI_IO_HPP
