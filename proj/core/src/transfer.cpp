#include <algorithm>

#include "jigsaw3d/downstream.hpp"
#include "jigsaw3d/errors.hpp"
#include "jigsaw3d/train.hpp"

namespace jigsaw3d {

EmbeddingFn frozen_embedding(const Parameters& params) {
  return [&params](const PointCloud& cloud) {
    return extract_embedding(params, network_input(cloud));
  };
}

std::vector<std::vector<double>> embed_clouds(const EmbeddingFn& embed, const Dataset& dataset,
                                              std::span<const std::size_t> indices) {
  std::vector<std::vector<double>> out;
  out.reserve(indices.size());
  for (std::size_t idx : indices) {
    require(idx < dataset.size(), "embed_clouds: index out of range");
    out.push_back(embed(dataset.clouds[idx]));
  }
  return out;
}

double svm_accuracy(std::span<const std::vector<double>> train_x, std::span<const int> train_y,
                    std::span<const std::vector<double>> test_x, std::span<const int> test_y,
                    const SvmOptions& svm, Rng& rng) {
  const LinearClassifier clf = fit_linear_svm(train_x, train_y, svm, rng);
  std::vector<int> preds;
  preds.reserve(test_x.size());
  for (const auto& x : test_x) preds.push_back(clf.predict(x));
  return accuracy(preds, test_y);
}

TransferReport transfer_eval(const EmbeddingFn& embed, const std::string& pretrain_dataset_name,
                             const Dataset& eval_dataset, const std::string& split_train,
                             const std::string& split_test, const SvmOptions& svm, Rng& rng,
                             std::optional<std::span<const std::size_t>> train_subset) {
  if (!eval_dataset.class_labels) throw ConfigError("transfer_eval: eval dataset has no labels");
  const std::vector<std::size_t>& train_split = eval_dataset.split(split_train);
  const std::vector<std::size_t>& test_split = eval_dataset.split(split_test);
  std::vector<std::size_t> train_idx(train_split);
  if (train_subset) {
    for (std::size_t idx : *train_subset) {
      require(std::find(train_split.begin(), train_split.end(), idx) != train_split.end(),
              "transfer_eval: subset index outside the training split");
    }
    train_idx.assign(train_subset->begin(), train_subset->end());
  }
  const auto& labels = *eval_dataset.class_labels;
  std::vector<int> train_y;
  std::vector<int> test_y;
  for (std::size_t i : train_idx) train_y.push_back(labels[i]);
  for (std::size_t i : test_split) test_y.push_back(labels[i]);

  const auto train_x = embed_clouds(embed, eval_dataset, train_idx);
  const auto test_x = embed_clouds(embed, eval_dataset, test_split);

  TransferReport report;
  report.accuracy = svm_accuracy(train_x, train_y, test_x, test_y, svm, rng);
  report.pretrain_dataset = pretrain_dataset_name;
  report.eval_dataset = eval_dataset.name;
  report.num_train = train_idx.size();
  report.num_test = test_split.size();
  return report;
}

TransferReport transfer_eval(const Parameters& params, const std::string& pretrain_dataset_name,
                             const Dataset& eval_dataset, const std::string& split_train,
                             const std::string& split_test, const SvmOptions& svm, Rng& rng,
                             std::optional<std::span<const std::size_t>> train_subset) {
  return transfer_eval(frozen_embedding(params), pretrain_dataset_name, eval_dataset, split_train,
                       split_test, svm, rng, train_subset);
}

}  // namespace jigsaw3d
