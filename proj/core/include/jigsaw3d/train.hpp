#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "jigsaw3d/dataset.hpp"
#include "jigsaw3d/jigsaw.hpp"
#include "jigsaw3d/net.hpp"
#include "jigsaw3d/optim.hpp"

namespace jigsaw3d {

enum class Task { kPretrain, kFinetuneSegmentation, kFinetuneClassification };

const char* task_name(Task task);
Task parse_task(const std::string& name);

struct TrainConfig {
  int epochs = 100;
  int batch_size = 8;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
  Task task = Task::kPretrain;
  // Pretraining only: reuse each cloud's epoch-0 permutation in every epoch.
  bool fixed_permutation = false;

  void validate() const;
  AdamOptions adam() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  // Per-point accuracy for pretraining / segmentation, per-cloud for
  // classification.
  double accuracy = 0.0;
  double seconds = 0.0;
  std::optional<double> eval_accuracy;
};

struct TrainLog {
  std::vector<EpochRecord> records;

  // Header "epoch,loss,accuracy,seconds" (plus ",eval_accuracy" when any
  // record carries one). Reals use %.17g.
  std::string to_csv(bool include_seconds = true) const;
};

struct TrainResult {
  Parameters params;
  TrainLog log;
  std::int64_t steps = 0;
};

// Called after every epoch; `epoch` is 1-based.
using EpochObserver = std::function<void(int epoch, const Parameters&, const EpochRecord&)>;

// Self-supervised pretraining on every cloud of `dataset`. Each epoch draws
// a fresh jigsaw sample per cloud (donor picked uniformly from the dataset).
// With condition_dim > 0 each sample gets a random one-hot class.
TrainResult pretrain(const Dataset& dataset, const JigsawConfig& jcfg, const NetworkConfig& ncfg,
                     const TrainConfig& tcfg, const EpochObserver& observer = {});

// Same loop starting from existing parameters.
TrainResult pretrain_from(Parameters params, const Dataset& dataset, const JigsawConfig& jcfg,
                          const TrainConfig& tcfg, const EpochObserver& observer = {});

struct FinetuneOptions {
  std::string train_split = "train";
  // When set, accuracy on this split is recorded after every epoch.
  std::optional<std::string> eval_split;
};

// Supervised training. Classification needs class_labels and an attached
// classifier; segmentation needs point_labels and a head sized to
// num_part_classes. Missing pieces throw ConfigError.
TrainResult finetune(const Parameters& params, const Dataset& dataset, const NetworkConfig& ncfg,
                     const TrainConfig& tcfg, const FinetuneOptions& opts = {},
                     const EpochObserver& observer = {});

struct Metrics {
  double accuracy = 0.0;
  double loss = 0.0;
  std::optional<double> miou;
};

struct EvalOptions {
  // Pretext evaluation only.
  JigsawConfig jigsaw;
  std::uint64_t seed = 0;
};

// Read-only. Unknown split -> ConfigError.
Metrics evaluate(const Parameters& params, const Dataset& dataset, const std::string& split,
                 Task task, const EvalOptions& opts = {});

// Clouds fed to the network are always first mapped to the unit cube.
PointCloud network_input(const PointCloud& cloud);

}  // namespace jigsaw3d
