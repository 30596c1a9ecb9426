// semslam - semantic-assisted LiDAR odometry, loop closure and mapping
// SPDX-License-Identifier: Apache-2.0
//
// Semantic class taxonomy: the retained classes, the raw-id remapping,
// and the per-class parameters (weight, voxel size, cluster radius).

#ifndef SEMSLAM_LABELS_HPP
#define SEMSLAM_LABELS_HPP

#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace semslam {

using ClassId = std::uint16_t;

/// Raw ids that map to no retained class are discarded on ingestion.
inline constexpr std::uint32_t kDiscard = 0xFFFFFFFFu;

/// Orientation prior attached to a class, used to gate fitted planes.
enum class OrientationPrior : std::uint8_t {
  kNone,    // no constraint
  kGround,  // plane normal must be near-vertical
  kWall,    // plane normal must be near-horizontal
};

struct SemanticLabel {
  ClassId id = 0;
  std::string name;
};

/// One retained class with its per-class parameters.
struct ClassSpec {
  std::string name;
  double weight = 1.0;          // w^l in the registration objective
  double voxel_size = 0.4;      // downsampling voxel edge, meters
  double cluster_radius = 2.0;  // graph clustering linkage radius, meters
  OrientationPrior prior = OrientationPrior::kNone;
  bool graph_eligible = true;   // ground-like classes carry no landmark value
};

/// The label taxonomy: retained classes plus the raw-id remapping.
/// Immutable after construction; share freely across threads.
class LabelTaxonomy {
 public:
  LabelTaxonomy(std::vector<ClassSpec> classes, std::map<std::uint32_t, std::string> raw_map)
      : classes_(std::move(classes)) {
    for (ClassId i = 0; i < classes_.size(); ++i) {
      if (name_to_id_.count(classes_[i].name) != 0) {
        throw std::invalid_argument("LabelTaxonomy: duplicate class name " + classes_[i].name);
      }
      name_to_id_[classes_[i].name] = i;
    }
    for (const auto& [raw, name] : raw_map) {
      if (name == "discard") {
        raw_to_class_[raw] = kDiscard;
        continue;
      }
      auto it = name_to_id_.find(name);
      if (it == name_to_id_.end()) {
        throw std::invalid_argument("LabelTaxonomy: mapping to unknown class " + name);
      }
      raw_to_class_[raw] = it->second;
    }
  }

  [[nodiscard]] std::size_t size() const { return classes_.size(); }

  [[nodiscard]] const ClassSpec& spec(ClassId id) const { return classes_.at(id); }

  [[nodiscard]] const std::string& name(ClassId id) const { return classes_.at(id).name; }

  [[nodiscard]] ClassId idOf(const std::string& name) const {
    auto it = name_to_id_.find(name);
    if (it == name_to_id_.end()) {
      throw std::out_of_range("LabelTaxonomy: unknown class " + name);
    }
    return it->second;
  }

  /// Maps a raw dataset label to a retained class id, or kDiscard.
  /// Unknown raw ids are discarded.
  [[nodiscard]] std::uint32_t mapRaw(std::uint32_t raw) const {
    auto it = raw_to_class_.find(raw);
    return it == raw_to_class_.end() ? kDiscard : it->second;
  }

  [[nodiscard]] const std::map<std::uint32_t, std::uint32_t>& rawMap() const {
    return raw_to_class_;
  }

 private:
  std::vector<ClassSpec> classes_;
  std::map<std::string, ClassId> name_to_id_;
  std::map<std::uint32_t, std::uint32_t> raw_to_class_;
};

/// The default 12-class taxonomy over SemanticKITTI raw ids. Moving classes
/// (vehicles, people, riders) and unlabeled/outlier points are discarded.
/// Voxel sizes: 0.8 m ground-like, 0.4 m extended structure, 0.2 m small
/// objects. Cluster radii: 2.0 m extended, 1.0 m compact.
[[nodiscard]] inline LabelTaxonomy defaultTaxonomy() {
  std::vector<ClassSpec> classes = {
      {"road", 1.0, 0.8, 2.0, OrientationPrior::kGround, false},
      {"sidewalk", 1.0, 0.8, 2.0, OrientationPrior::kGround, false},
      {"parking", 1.0, 0.8, 2.0, OrientationPrior::kGround, false},
      {"other-ground", 1.0, 0.8, 2.0, OrientationPrior::kGround, false},
      {"building", 1.0, 0.4, 2.0, OrientationPrior::kWall, true},
      {"vegetation", 1.0, 0.4, 2.0, OrientationPrior::kNone, true},
      {"trunk", 1.0, 0.2, 1.0, OrientationPrior::kNone, true},
      {"terrain", 1.0, 0.8, 2.0, OrientationPrior::kGround, false},
      {"pole", 1.0, 0.2, 1.0, OrientationPrior::kNone, true},
      {"traffic-sign", 1.0, 0.2, 1.0, OrientationPrior::kNone, true},
      {"fence", 1.0, 0.4, 2.0, OrientationPrior::kWall, true},
      {"other-structure", 1.0, 0.4, 2.0, OrientationPrior::kNone, true},
  };
  std::map<std::uint32_t, std::string> raw = {
      {40, "road"},          {48, "sidewalk"},    {44, "parking"},
      {49, "other-ground"},  {50, "building"},    {70, "vegetation"},
      {71, "trunk"},         {72, "terrain"},     {80, "pole"},
      {81, "traffic-sign"},  {51, "fence"},       {52, "other-structure"},
  };
  // Explicit discards, so a written taxonomy file documents the choice.
  for (std::uint32_t id : {0u, 1u, 10u, 11u, 13u, 15u, 16u, 18u, 20u, 30u, 31u,
                           32u, 60u, 99u, 252u, 253u, 254u, 255u, 256u, 257u, 258u, 259u}) {
    raw[id] = "discard";
  }
  return LabelTaxonomy(std::move(classes), std::move(raw));
}

namespace detail {

[[nodiscard]] inline OrientationPrior priorFromString(const std::string& s) {
  if (s == "none") return OrientationPrior::kNone;
  if (s == "ground") return OrientationPrior::kGround;
  if (s == "wall") return OrientationPrior::kWall;
  throw std::invalid_argument("unknown orientation prior: " + s);
}

[[nodiscard]] inline const char* priorToString(OrientationPrior p) {
  switch (p) {
    case OrientationPrior::kGround: return "ground";
    case OrientationPrior::kWall: return "wall";
    default: return "none";
  }
}

}  // namespace detail

/// Parses a taxonomy from its text form. Two directives:
///   class <name> <weight> <voxel_size> <cluster_radius> <none|ground|wall> <graph 0|1>
///   map <raw_id> <class_name|discard>
/// Class ids follow declaration order. '#' starts a comment.
[[nodiscard]] inline LabelTaxonomy parseTaxonomy(std::istream& in) {
  std::vector<ClassSpec> classes;
  std::map<std::uint32_t, std::string> raw;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string directive;
    if (!(ss >> directive)) continue;
    if (directive == "class") {
      ClassSpec spec;
      std::string prior;
      int graph = 1;
      if (!(ss >> spec.name >> spec.weight >> spec.voxel_size >> spec.cluster_radius >> prior >> graph)) {
        throw std::runtime_error("taxonomy line " + std::to_string(line_no) + ": malformed class");
      }
      if (spec.weight <= 0.0 || spec.voxel_size <= 0.0 || spec.cluster_radius <= 0.0) {
        throw std::runtime_error("taxonomy line " + std::to_string(line_no) +
                                 ": weight/voxel/radius must be positive");
      }
      spec.prior = detail::priorFromString(prior);
      spec.graph_eligible = graph != 0;
      classes.push_back(std::move(spec));
    } else if (directive == "map") {
      std::uint32_t raw_id = 0;
      std::string name;
      if (!(ss >> raw_id >> name)) {
        throw std::runtime_error("taxonomy line " + std::to_string(line_no) + ": malformed map");
      }
      raw[raw_id] = name;
    } else {
      throw std::runtime_error("taxonomy line " + std::to_string(line_no) +
                               ": unknown directive " + directive);
    }
  }
  return LabelTaxonomy(std::move(classes), std::move(raw));
}

[[nodiscard]] inline LabelTaxonomy loadTaxonomy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open taxonomy file: " + path);
  return parseTaxonomy(in);
}

inline void writeTaxonomy(const LabelTaxonomy& taxonomy, std::ostream& out) {
  out << "# class <name> <weight> <voxel> <cluster_radius> <prior> <graph>\n";
  for (ClassId i = 0; i < taxonomy.size(); ++i) {
    const ClassSpec& c = taxonomy.spec(i);
    out << "class " << c.name << ' ' << c.weight << ' ' << c.voxel_size << ' '
        << c.cluster_radius << ' ' << detail::priorToString(c.prior) << ' '
        << (c.graph_eligible ? 1 : 0) << '\n';
  }
  for (const auto& [raw, cls] : taxonomy.rawMap()) {
    out << "map " << raw << ' ' << (cls == kDiscard ? "discard" : taxonomy.name(ClassId(cls)))
        << '\n';
  }
}

}  // namespace semslam

#endif  // SEMSLAM_LABELS_HPP
