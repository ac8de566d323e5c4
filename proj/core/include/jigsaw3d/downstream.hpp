#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jigsaw3d/dataset.hpp"
#include "jigsaw3d/net.hpp"
#include "jigsaw3d/rng.hpp"

namespace jigsaw3d {

// ---- linear SVM ----------------------------------------------------------

struct SvmOptions {
  double c_reg = 1.0;
  // Upper bound on coordinate-descent passes per one-vs-rest problem.
  int epochs = 1000;
  // Stop once the projected-gradient spread of a pass falls below this.
  double tolerance = 1e-6;
  // Scale each embedding to unit L2 norm before fitting and predicting.
  bool unit_norm = false;
  // Fit in z-scored feature space, then fold the scaling back into the
  // returned weights.
  bool standardize = false;
};

struct LinearClassifier {
  int num_classes = 0;
  int dim = 0;
  std::vector<double> weights;  // num_classes x dim, row-major
  std::vector<double> biases;
  double c_reg = 1.0;
  bool unit_norm = false;

  std::vector<double> scores(std::span<const double> x) const;
  // argmax of scores, ties to the lowest class index.
  int predict(std::span<const double> x) const;
};

// One-vs-rest linear SVM: 1/2 |w|^2 + C * mean hinge loss, bias as a
// constant feature, solved by dual coordinate descent. Every class problem
// sees the same seed-driven sample order. Fewer than two classes ->
// ConfigError.
LinearClassifier fit_linear_svm(std::span<const std::vector<double>> embeddings,
                                std::span<const int> labels, const SvmOptions& opts, Rng& rng);

// ---- few-shot sampling ---------------------------------------------------

struct FewShotPlan {
  std::vector<std::size_t> selected_indices;
  std::map<int, int> per_class_counts;
  std::uint64_t seed = 0;
};

// One uniformly chosen cloud per class, then uniform fill without
// replacement from the rest of the split.
FewShotPlan few_shot_sample(const Dataset& dataset, const std::string& split,
                            std::size_t n_total, Rng& rng);

// ---- metrics -------------------------------------------------------------

double accuracy(std::span<const int> predictions, std::span<const int> labels);

// Part-averaged IoU per cloud, averaged per object class, then over classes;
// reported in percent. A part absent from both prediction and ground truth
// has IoU 1.
double mean_iou(std::span<const std::vector<int>> predictions,
                std::span<const std::vector<int>> labels,
                const std::map<int, std::vector<int>>& parts_per_class,
                std::span<const int> class_of_cloud);

// ---- transfer evaluation -------------------------------------------------

using EmbeddingFn = std::function<std::vector<double>(const PointCloud&)>;

// Embeddings from frozen parameters (inputs mapped to the unit cube first).
EmbeddingFn frozen_embedding(const Parameters& params);

std::vector<std::vector<double>> embed_clouds(const EmbeddingFn& embed, const Dataset& dataset,
                                              std::span<const std::size_t> indices);

struct TransferReport {
  double accuracy = 0.0;
  std::string pretrain_dataset;
  std::string eval_dataset;
  std::size_t num_train = 0;
  std::size_t num_test = 0;
};

// Embeds both splits, fits the SVM on train (or on `train_subset` when
// given, a subset of split_train indices) and scores test.
TransferReport transfer_eval(const EmbeddingFn& embed, const std::string& pretrain_dataset_name,
                             const Dataset& eval_dataset, const std::string& split_train,
                             const std::string& split_test, const SvmOptions& svm, Rng& rng,
                             std::optional<std::span<const std::size_t>> train_subset = {});

TransferReport transfer_eval(const Parameters& params, const std::string& pretrain_dataset_name,
                             const Dataset& eval_dataset, const std::string& split_train,
                             const std::string& split_test, const SvmOptions& svm, Rng& rng,
                             std::optional<std::span<const std::size_t>> train_subset = {});

// Same as above on precomputed embeddings (rows indexed like the dataset).
double svm_accuracy(std::span<const std::vector<double>> train_x, std::span<const int> train_y,
                    std::span<const std::vector<double>> test_x, std::span<const int> test_y,
                    const SvmOptions& svm, Rng& rng);

// ---- PCA -----------------------------------------------------------------

// Projection of mean-centered rows onto the top two principal directions,
// found by power iteration with deflation. Signs are fixed so the largest
// |component| of each direction is positive.
std::vector<std::array<double, 2>> pca_2d(std::span<const std::vector<double>> rows, Rng& rng,
                                          int iterations = 500);

}  // namespace jigsaw3d
