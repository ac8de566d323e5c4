#include "jigsaw3d/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

#include "jigsaw3d/csv.hpp"
#include "jigsaw3d/downstream.hpp"
#include "jigsaw3d/errors.hpp"
#include "jigsaw3d/loss.hpp"

namespace jigsaw3d {
namespace {

// Stream-index tags keep the generators of different loop roles disjoint.
constexpr std::uint64_t kOrderStream = 0x6f72646572000000ULL;
constexpr std::uint64_t kSampleStream = 0x73616d706c000000ULL;

std::vector<std::size_t> shuffled_order(std::vector<std::size_t> indices, Rng& rng) {
  for (std::size_t i = indices.size(); i-- > 1;) {
    std::swap(indices[i], indices[static_cast<std::size_t>(rng.uniform_int(i + 1))]);
  }
  return indices;
}

void zero(Parameters& p) {
  for (auto& t : p.tensors()) t.tensor->fill(0.0);
}

int argmax_row(std::span<const double> row) {
  return static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
}

std::size_t count_correct(const Tensor2& logits, std::span<const int> targets) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    if (argmax_row(logits.row(i)) == targets[i]) ++correct;
  }
  return correct;
}

void guard_finite(double loss, const Parameters& params) {
  if (!std::isfinite(loss)) throw std::runtime_error("training diverged: non-finite loss");
  if (!params.all_finite()) throw std::runtime_error("training diverged: non-finite parameter");
}

// Shared mini-batch driver: `step_one(index, grads)` accumulates one
// sample's gradient and returns (loss, correct, count).
struct SampleStats {
  double loss = 0.0;
  std::size_t correct = 0;
  std::size_t count = 0;
};

template <typename StepOne>
EpochRecord run_epoch(Parameters& params, AdamState& adam, const TrainConfig& tcfg,
                      const std::vector<std::size_t>& order, int epoch, StepOne&& step_one) {
  const auto start = std::chrono::steady_clock::now();
  Parameters grads = params.zeros_like();
  double loss_sum = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  const AdamOptions adam_opts = tcfg.adam();
  const auto batch = static_cast<std::size_t>(tcfg.batch_size);
  for (std::size_t begin = 0; begin < order.size(); begin += batch) {
    const std::size_t end = std::min(order.size(), begin + batch);
    zero(grads);
    for (std::size_t b = begin; b < end; ++b) {
      const SampleStats s = step_one(order[b], grads);
      loss_sum += s.loss;
      correct += s.correct;
      total += s.count;
    }
    for (auto& t : grads.tensors()) {
      for (double& g : t.tensor->data()) g /= static_cast<double>(end - begin);
    }
    adam_step(params, grads, adam, adam_opts);
    guard_finite(loss_sum, params);
  }
  EpochRecord rec;
  rec.epoch = epoch;
  rec.loss = loss_sum / static_cast<double>(order.size());
  rec.accuracy = total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
  rec.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

std::vector<int> to_int(std::span<const VoxelId> ids) { return {ids.begin(), ids.end()}; }

void check_encoder_matches(const Parameters& params, const NetworkConfig& ncfg) {
  if (params.config.encoder_widths != ncfg.encoder_widths ||
      params.config.embed_dim != ncfg.embed_dim) {
    throw ConfigError("finetune: network config encoder does not match the parameters");
  }
}

}  // namespace

const char* task_name(Task task) {
  switch (task) {
    case Task::kPretrain:
      return "pretrain";
    case Task::kFinetuneSegmentation:
      return "finetune_segmentation";
    case Task::kFinetuneClassification:
      return "finetune_classification";
  }
  return "?";
}

Task parse_task(const std::string& name) {
  if (name == "pretrain") return Task::kPretrain;
  if (name == "finetune_segmentation" || name == "seg") return Task::kFinetuneSegmentation;
  if (name == "finetune_classification" || name == "cls") return Task::kFinetuneClassification;
  throw ConfigError("unknown task '" + name + "'");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  // Zero is accepted: it turns training into a pure evaluation pass.
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("train.learning_rate must be finite and >= 0");
  }
}

AdamOptions TrainConfig::adam() const {
  return {learning_rate, adam_beta1, adam_beta2, adam_eps, weight_decay};
}

std::string TrainLog::to_csv(bool include_seconds) const {
  const bool with_eval = std::any_of(records.begin(), records.end(),
                                     [](const EpochRecord& r) { return r.eval_accuracy.has_value(); });
  std::ostringstream os;
  os << "epoch,loss,accuracy";
  if (include_seconds) os << ",seconds";
  if (with_eval) os << ",eval_accuracy";
  os << "\n";
  for (const auto& r : records) {
    os << r.epoch << ',' << format_real(r.loss) << ',' << format_real(r.accuracy);
    if (include_seconds) os << ',' << format_real(r.seconds);
    if (with_eval) os << ',' << (r.eval_accuracy ? format_real(*r.eval_accuracy) : "");
    os << "\n";
  }
  return os.str();
}

PointCloud network_input(const PointCloud& cloud) { return scale_to_unit_cube(cloud); }

TrainResult pretrain(const Dataset& dataset, const JigsawConfig& jcfg, const NetworkConfig& ncfg,
                     const TrainConfig& tcfg, const EpochObserver& observer) {
  ncfg.validate();
  Rng init_rng = Rng::stream(tcfg.seed, 0);
  return pretrain_from(init_parameters(ncfg, init_rng), dataset, jcfg, tcfg, observer);
}

TrainResult pretrain_from(Parameters params, const Dataset& dataset, const JigsawConfig& jcfg,
                          const TrainConfig& tcfg, const EpochObserver& observer) {
  jcfg.validate();
  tcfg.validate();
  if (dataset.clouds.empty()) throw ConfigError("pretrain: dataset is empty");
  if (params.config.num_point_classes != jcfg.num_classes()) {
    throw ConfigError("pretrain: network.num_point_classes must equal k^3 = " +
                      std::to_string(jcfg.num_classes()));
  }
  const std::size_t n = dataset.size();
  const int cond_dim = params.config.condition_dim;
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});

  TrainResult result{std::move(params), {}, 0};
  AdamState adam = AdamState::for_parameters(result.params);
  for (int epoch = 1; epoch <= tcfg.epochs; ++epoch) {
    Rng order_rng = Rng::stream(tcfg.seed, kOrderStream + static_cast<std::uint64_t>(epoch));
    const auto order = shuffled_order(all, order_rng);
    const std::uint64_t epoch_seed = Rng::stream_seed(
        tcfg.seed, kSampleStream + static_cast<std::uint64_t>(tcfg.fixed_permutation ? 1 : epoch));
    const Parameters& current = result.params;

    auto step = [&](std::size_t idx, Parameters& grads) {
      Rng rng = Rng::stream(epoch_seed, idx);
      const PointCloud* donor = nullptr;
      if (jcfg.replace_count > 0) donor = &dataset.clouds[static_cast<std::size_t>(rng.uniform_int(n))];
      std::vector<double> cond;
      if (cond_dim > 0) cond = one_hot(static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(cond_dim))), cond_dim);
      const JigsawSample sample = make_jigsaw_sample(dataset.clouds[idx], jcfg, rng, donor);
      const ForwardTrace trace = forward_trace(current, sample.shuffled, cond, true, false);
      const std::vector<int> targets = to_int(sample.targets);
      const LossAndGrad lg = cross_entropy_per_point(trace.logits, targets);
      backward(current, trace, &lg.grad, {}, grads);
      return SampleStats{lg.loss, count_correct(trace.logits, targets), targets.size()};
    };
    EpochRecord rec = run_epoch(result.params, adam, tcfg, order, epoch, step);
    result.log.records.push_back(rec);
    if (observer) observer(epoch, result.params, rec);
  }
  result.steps = adam.step;
  return result;
}

TrainResult finetune(const Parameters& params, const Dataset& dataset, const NetworkConfig& ncfg,
                     const TrainConfig& tcfg, const FinetuneOptions& opts,
                     const EpochObserver& observer) {
  tcfg.validate();
  check_encoder_matches(params, ncfg);
  const bool classification = tcfg.task == Task::kFinetuneClassification;
  if (tcfg.task == Task::kPretrain) throw ConfigError("finetune: task must be a finetune task");
  if (classification) {
    if (!dataset.class_labels) throw ConfigError("finetune: classification needs class labels");
    if (!params.classifier || params.num_object_classes() < *dataset.num_classes) {
      throw ConfigError("finetune: attach a classifier sized to the dataset's classes first");
    }
  } else {
    if (!dataset.point_labels || !dataset.num_part_classes) {
      throw ConfigError("finetune: segmentation needs per-point labels");
    }
    if (params.config.num_point_classes != *dataset.num_part_classes) {
      throw ConfigError("finetune: head must be swapped to num_part_classes first");
    }
    if (params.config.condition_dim > 0 &&
        (!dataset.class_labels || *dataset.num_classes > params.config.condition_dim)) {
      throw ConfigError("finetune: conditioning needs class labels within condition_dim");
    }
  }

  const std::vector<std::size_t> train_idx = dataset.split(opts.train_split);
  if (train_idx.empty()) throw ConfigError("finetune: empty training split");
  if (opts.eval_split) (void)dataset.split(*opts.eval_split);

  std::vector<PointCloud> inputs;
  inputs.reserve(dataset.size());
  for (const auto& c : dataset.clouds) inputs.push_back(network_input(c));
  const int cond_dim = params.config.condition_dim;
  auto condition_of = [&](std::size_t idx) {
    return cond_dim > 0 ? one_hot((*dataset.class_labels)[idx], cond_dim) : std::vector<double>{};
  };

  TrainResult result{params, {}, 0};
  AdamState adam = AdamState::for_parameters(result.params);
  for (int epoch = 1; epoch <= tcfg.epochs; ++epoch) {
    Rng order_rng = Rng::stream(tcfg.seed, kOrderStream + static_cast<std::uint64_t>(epoch));
    const auto order = shuffled_order(train_idx, order_rng);
    const Parameters& current = result.params;

    auto step = [&](std::size_t idx, Parameters& grads) {
      if (classification) {
        const ForwardTrace trace = forward_trace(current, inputs[idx], {}, false, true);
        Tensor2 logits(1, trace.class_logits.size());
        std::copy(trace.class_logits.begin(), trace.class_logits.end(), logits.data().begin());
        const int label = (*dataset.class_labels)[idx];
        const LossAndGrad lg = cross_entropy_per_point(logits, std::span<const int>(&label, 1));
        backward(current, trace, nullptr, lg.grad.row(0), grads);
        return SampleStats{lg.loss, count_correct(logits, std::span<const int>(&label, 1)), 1};
      }
      const std::vector<double> cond = condition_of(idx);
      const ForwardTrace trace = forward_trace(current, inputs[idx], cond, true, false);
      const std::vector<int>& targets = (*dataset.point_labels)[idx];
      const LossAndGrad lg = cross_entropy_per_point(trace.logits, targets);
      backward(current, trace, &lg.grad, {}, grads);
      return SampleStats{lg.loss, count_correct(trace.logits, targets), targets.size()};
    };
    EpochRecord rec = run_epoch(result.params, adam, tcfg, order, epoch, step);
    if (opts.eval_split) {
      rec.eval_accuracy = evaluate(result.params, dataset, *opts.eval_split, tcfg.task).accuracy;
    }
    result.log.records.push_back(rec);
    if (observer) observer(epoch, result.params, rec);
  }
  result.steps = adam.step;
  return result;
}

Metrics evaluate(const Parameters& params, const Dataset& dataset, const std::string& split,
                 Task task, const EvalOptions& opts) {
  const std::vector<std::size_t>& indices = dataset.split(split);
  if (indices.empty()) throw ConfigError("evaluate: split '" + split + "' is empty");
  Metrics m;
  double loss_sum = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;

  if (task == Task::kPretrain) {
    opts.jigsaw.validate();
    const int cond_dim = params.config.condition_dim;
    for (std::size_t idx : indices) {
      Rng rng = Rng::stream(opts.seed, idx);
      const PointCloud* donor = nullptr;
      if (opts.jigsaw.replace_count > 0) {
        donor = &dataset.clouds[static_cast<std::size_t>(rng.uniform_int(dataset.size()))];
      }
      std::vector<double> cond;
      if (cond_dim > 0) cond = one_hot(static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(cond_dim))), cond_dim);
      const JigsawSample sample = make_jigsaw_sample(dataset.clouds[idx], opts.jigsaw, rng, donor);
      const ForwardOutput out = forward(params, sample.shuffled, cond);
      const std::vector<int> targets = to_int(sample.targets);
      loss_sum += cross_entropy_per_point(out.logits, targets).loss;
      correct += count_correct(out.logits, targets);
      total += targets.size();
    }
  } else if (task == Task::kFinetuneClassification) {
    if (!dataset.class_labels) throw ConfigError("evaluate: classification needs class labels");
    std::vector<int> preds;
    std::vector<int> labels;
    for (std::size_t idx : indices) {
      const std::vector<double> logits_v = classify(params, network_input(dataset.clouds[idx]));
      Tensor2 logits(1, logits_v.size());
      std::copy(logits_v.begin(), logits_v.end(), logits.data().begin());
      const int label = (*dataset.class_labels)[idx];
      loss_sum += cross_entropy_per_point(logits, std::span<const int>(&label, 1)).loss;
      preds.push_back(argmax_row(logits.row(0)));
      labels.push_back(label);
    }
    m.accuracy = accuracy(preds, labels);
    m.loss = loss_sum / static_cast<double>(indices.size());
    return m;
  } else {
    if (!dataset.point_labels) throw ConfigError("evaluate: segmentation needs point labels");
    const int cond_dim = params.config.condition_dim;
    std::vector<std::vector<int>> preds;
    std::vector<std::vector<int>> labels;
    std::vector<int> classes;
    for (std::size_t idx : indices) {
      std::vector<double> cond;
      if (cond_dim > 0) cond = one_hot((*dataset.class_labels)[idx], cond_dim);
      const ForwardOutput out = forward(params, network_input(dataset.clouds[idx]), cond);
      const std::vector<int>& targets = (*dataset.point_labels)[idx];
      loss_sum += cross_entropy_per_point(out.logits, targets).loss;
      std::vector<int> p(out.logits.rows());
      for (std::size_t i = 0; i < p.size(); ++i) p[i] = argmax_row(out.logits.row(i));
      correct += static_cast<std::size_t>(
          std::inner_product(p.begin(), p.end(), targets.begin(), 0L, std::plus<>(),
                             [](int a, int b) { return a == b ? 1L : 0L; }));
      total += p.size();
      preds.push_back(std::move(p));
      labels.push_back(targets);
      if (dataset.class_labels) classes.push_back((*dataset.class_labels)[idx]);
    }
    if (dataset.class_labels && !dataset.parts_per_class.empty()) {
      m.miou = mean_iou(preds, labels, dataset.parts_per_class, classes);
    }
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(total);
  m.loss = loss_sum / static_cast<double>(indices.size());
  return m;
}

}  // namespace jigsaw3d
