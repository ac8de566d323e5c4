#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jigsaw3d/geometry.hpp"

namespace jigsaw3d {

// Named collection of clouds with optional object-class and per-point
// (part / semantic) labels. Construct through Dataset::Builder or fill the
// fields and call validate().
struct Dataset {
  std::string name;
  std::vector<PointCloud> clouds;

  std::optional<std::vector<int>> class_labels;
  std::optional<int> num_classes;
  std::vector<std::string> class_names;

  // One entry per cloud when present; part ids are global across classes.
  std::optional<std::vector<std::vector<int>>> point_labels;
  std::optional<int> num_part_classes;
  // Object class -> part ids admissible for that class.
  std::map<int, std::vector<int>> parts_per_class;

  // Split name -> cloud indices. Lists are disjoint.
  std::map<std::string, std::vector<std::size_t>> splits;

  std::size_t size() const noexcept { return clouds.size(); }

  // Throws ContractViolation if any dataset invariant is broken.
  void validate() const;

  // Indices of `split`; throws ConfigError for an unknown split name.
  const std::vector<std::size_t>& split(const std::string& split_name) const;

  // Indices of `split` if it exists, otherwise every cloud.
  std::vector<std::size_t> split_or_all(const std::string& split_name) const;

  bool has_split(const std::string& split_name) const {
    return splits.count(split_name) != 0;
  }
};

}  // namespace jigsaw3d
