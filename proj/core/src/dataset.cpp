#include "jigsaw3d/dataset.hpp"

#include <numeric>
#include <vector>

#include "jigsaw3d/errors.hpp"

namespace jigsaw3d {

void Dataset::validate() const {
  if (class_labels) {
    require(class_labels->size() == clouds.size(), "Dataset: one class label per cloud required");
    require(num_classes.has_value() && *num_classes >= 1,
            "Dataset: num_classes required with class labels");
    for (int c : *class_labels) {
      require(c >= 0 && c < *num_classes, "Dataset: class label out of range");
    }
  }
  if (point_labels) {
    require(point_labels->size() == clouds.size(), "Dataset: one point-label list per cloud");
    for (std::size_t i = 0; i < clouds.size(); ++i) {
      require((*point_labels)[i].size() == clouds[i].size(),
              "Dataset: point-label count differs from cloud size");
      if (num_part_classes) {
        for (int p : (*point_labels)[i]) {
          require(p >= 0 && p < *num_part_classes, "Dataset: part label out of range");
        }
      }
    }
  }
  std::vector<char> used(clouds.size(), 0);
  for (const auto& [split_name, indices] : splits) {
    for (std::size_t i : indices) {
      require(i < clouds.size(), "Dataset: split '" + split_name + "' index out of bounds");
      require(!used[i], "Dataset: splits overlap at index " + std::to_string(i));
      used[i] = 1;
    }
  }
}

const std::vector<std::size_t>& Dataset::split(const std::string& split_name) const {
  auto it = splits.find(split_name);
  if (it == splits.end()) throw ConfigError("unknown split '" + split_name + "'");
  return it->second;
}

std::vector<std::size_t> Dataset::split_or_all(const std::string& split_name) const {
  if (auto it = splits.find(split_name); it != splits.end()) return it->second;
  std::vector<std::size_t> all(clouds.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return all;
}

}  // namespace jigsaw3d
