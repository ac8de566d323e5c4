#include <algorithm>
#include <map>

#include "jigsaw3d/downstream.hpp"
#include "jigsaw3d/errors.hpp"

namespace jigsaw3d {

double accuracy(std::span<const int> predictions, std::span<const int> labels) {
  require(predictions.size() == labels.size(), "accuracy: length mismatch");
  require(!labels.empty(), "accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predictions[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double mean_iou(std::span<const std::vector<int>> predictions,
                std::span<const std::vector<int>> labels,
                const std::map<int, std::vector<int>>& parts_per_class,
                std::span<const int> class_of_cloud) {
  require(predictions.size() == labels.size() && labels.size() == class_of_cloud.size(),
          "mean_iou: per-cloud inputs must align");
  require(!labels.empty(), "mean_iou: no clouds");

  std::map<int, std::pair<double, std::size_t>> per_class;  // sum, count
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto it = parts_per_class.find(class_of_cloud[i]);
    require(it != parts_per_class.end(), "mean_iou: class without part list");
    const std::vector<int>& parts = it->second;
    require(!parts.empty(), "mean_iou: class with empty part list");
    const std::vector<int>& gt = labels[i];
    const std::vector<int>& pr = predictions[i];
    require(gt.size() == pr.size(), "mean_iou: prediction/label length mismatch");
    for (int label : gt) {
      require(std::find(parts.begin(), parts.end(), label) != parts.end(),
              "mean_iou: label is not a part of the cloud's class");
    }
    double iou_sum = 0.0;
    for (int part : parts) {
      std::size_t inter = 0;
      std::size_t uni = 0;
      for (std::size_t j = 0; j < gt.size(); ++j) {
        const bool g = gt[j] == part;
        const bool p = pr[j] == part;
        inter += (g && p) ? 1 : 0;
        uni += (g || p) ? 1 : 0;
      }
      iou_sum += uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
    }
    auto& acc = per_class[class_of_cloud[i]];
    acc.first += iou_sum / static_cast<double>(parts.size());
    acc.second += 1;
  }
  double total = 0.0;
  for (const auto& [cls, acc] : per_class) total += acc.first / static_cast<double>(acc.second);
  return 100.0 * total / static_cast<double>(per_class.size());
}

}  // namespace jigsaw3d
