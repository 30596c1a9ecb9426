// semslam - semantic-assisted LiDAR odometry, loop closure and mapping
// SPDX-License-Identifier: Apache-2.0

#ifndef SEMSLAM_PLY_IO_HPP
#define SEMSLAM_PLY_IO_HPP

#include <array>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "semslam/scan.hpp"

namespace semslam {

/// Fixed per-class display palette (RGB), indexed modulo its size.
[[nodiscard]] inline std::array<std::uint8_t, 3> classColor(ClassId id) {
  static constexpr std::array<std::array<std::uint8_t, 3>, 12> kPalette = {{
      {128, 64, 128},   // road
      {244, 35, 232},   // sidewalk
      {250, 170, 160},  // parking
      {81, 0, 81},      // other-ground
      {70, 70, 70},     // building
      {107, 142, 35},   // vegetation
      {102, 51, 0},     // trunk
      {152, 251, 152},  // terrain
      {153, 153, 153},  // pole
      {220, 220, 0},    // traffic-sign
      {190, 153, 153},  // fence
      {150, 120, 90},   // other-structure
  }};
  return kPalette[id % kPalette.size()];
}

/// Writes a labeled point cloud as binary little-endian PLY with per-class
/// colors. Coordinates must be finite.
inline void exportMapPly(const std::vector<LabeledPoint>& points, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);

  out << "ply\n"
      << "format binary_little_endian 1.0\n"
      << "element vertex " << points.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
      << "end_header\n";

  for (const LabeledPoint& p : points) {
    const float xyz[3] = {static_cast<float>(p.position.x()),
                          static_cast<float>(p.position.y()),
                          static_cast<float>(p.position.z())};
    const auto rgb = classColor(p.label);
    out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
    out.write(reinterpret_cast<const char*>(rgb.data()), 3);
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace semslam

#endif  // SEMSLAM_PLY_IO_HPP
