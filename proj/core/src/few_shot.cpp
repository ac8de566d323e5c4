#include <algorithm>
#include <map>

#include "jigsaw3d/downstream.hpp"
#include "jigsaw3d/errors.hpp"

namespace jigsaw3d {

FewShotPlan few_shot_sample(const Dataset& dataset, const std::string& split,
                            std::size_t n_total, Rng& rng) {
  if (!dataset.class_labels) throw ConfigError("few_shot_sample: dataset has no class labels");
  const std::vector<std::size_t>& indices = dataset.split(split);
  const std::vector<int>& labels = *dataset.class_labels;

  std::map<int, std::vector<std::size_t>> by_class;
  if (dataset.num_classes) {
    for (int c = 0; c < *dataset.num_classes; ++c) by_class[c];
  }
  for (std::size_t idx : indices) by_class[labels[idx]].push_back(idx);
  for (const auto& [c, members] : by_class) {
    if (members.empty()) {
      throw ConfigError("few_shot_sample: class " + std::to_string(c) + " is empty in split '" +
                        split + "'");
    }
  }
  if (n_total < by_class.size()) {
    throw ConfigError("few_shot_sample: n_total smaller than the number of classes");
  }
  if (n_total > indices.size()) throw ConfigError("few_shot_sample: n_total exceeds split size");

  FewShotPlan plan;
  plan.seed = rng.seed();
  std::vector<char> taken(dataset.size(), 0);
  for (const auto& [c, members] : by_class) {
    const std::size_t pick = members[static_cast<std::size_t>(rng.uniform_int(members.size()))];
    plan.selected_indices.push_back(pick);
    taken[pick] = 1;
  }
  std::vector<std::size_t> rest;
  for (std::size_t idx : indices) {
    if (!taken[idx]) rest.push_back(idx);
  }
  const std::size_t fill = n_total - plan.selected_indices.size();
  for (std::size_t j = 0; j < fill; ++j) {
    const std::size_t r = j + static_cast<std::size_t>(rng.uniform_int(rest.size() - j));
    std::swap(rest[j], rest[r]);
    plan.selected_indices.push_back(rest[j]);
  }
  for (std::size_t idx : plan.selected_indices) plan.per_class_counts[labels[idx]] += 1;
  return plan;
}

}  // namespace jigsaw3d
