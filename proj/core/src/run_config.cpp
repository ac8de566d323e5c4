#include "jigsaw3d/run_config.hpp"

#include <json.hpp>

#include "jigsaw3d/errors.hpp"

namespace jigsaw3d {
namespace {

using nlohmann::ordered_json;

template <typename T>
void read(const ordered_json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::string RunConfig::to_json() const {
  ordered_json j;
  j["format_version"] = format_version;
  j["jigsaw"] = {{"k", jigsaw.k},
                 {"rotate_fraction", jigsaw.rotate_fraction},
                 {"replace_count", jigsaw.replace_count},
                 {"jitter_sigma", jigsaw.jitter_sigma},
                 {"jitter_clip", jigsaw.jitter_clip}};
  j["network"] = {{"encoder_widths", network.encoder_widths},
                  {"embed_dim", network.embed_dim},
                  {"head_widths", network.head_widths},
                  {"num_point_classes", network.num_point_classes},
                  {"condition_dim", network.condition_dim}};
  j["train"] = {{"epochs", train.epochs},
                {"batch_size", train.batch_size},
                {"learning_rate", train.learning_rate},
                {"adam_beta1", train.adam_beta1},
                {"adam_beta2", train.adam_beta2},
                {"adam_eps", train.adam_eps},
                {"weight_decay", train.weight_decay},
                {"seed", train.seed},
                {"task", task_name(train.task)},
                {"fixed_permutation", train.fixed_permutation}};
  j["data"] = data;
  j["eval_data"] = eval_data;
  j["off_samples"] = off_samples;
  j["split_train"] = split_train;
  j["split_test"] = split_test;
  j["labels_n"] = labels_n ? ordered_json(*labels_n) : ordered_json(nullptr);
  j["labels_frac"] = labels_frac ? ordered_json(*labels_frac) : ordered_json(nullptr);
  j["svm"] = {{"c_reg", svm.c_reg},
              {"epochs", svm.epochs},
              {"tolerance", svm.tolerance},
              {"unit_norm", svm.unit_norm},
              {"standardize", svm.standardize}};
  return j.dump(2) + "\n";
}

RunConfig RunConfig::from_json(const std::string& text) {
  RunConfig c;
  try {
    const ordered_json j = ordered_json::parse(text);
    read(j, "format_version", c.format_version);
    if (c.format_version != kRunConfigFormatVersion) {
      throw ConfigError("config format_version " + std::to_string(c.format_version) +
                        " is not supported (expected " + std::to_string(kRunConfigFormatVersion) +
                        ")");
    }
    if (j.contains("jigsaw")) {
      const auto& s = j.at("jigsaw");
      read(s, "k", c.jigsaw.k);
      read(s, "rotate_fraction", c.jigsaw.rotate_fraction);
      read(s, "replace_count", c.jigsaw.replace_count);
      read(s, "jitter_sigma", c.jigsaw.jitter_sigma);
      read(s, "jitter_clip", c.jigsaw.jitter_clip);
    }
    if (j.contains("network")) {
      const auto& s = j.at("network");
      read(s, "encoder_widths", c.network.encoder_widths);
      read(s, "embed_dim", c.network.embed_dim);
      read(s, "head_widths", c.network.head_widths);
      read(s, "num_point_classes", c.network.num_point_classes);
      read(s, "condition_dim", c.network.condition_dim);
    }
    if (j.contains("train")) {
      const auto& s = j.at("train");
      read(s, "epochs", c.train.epochs);
      read(s, "batch_size", c.train.batch_size);
      read(s, "learning_rate", c.train.learning_rate);
      read(s, "adam_beta1", c.train.adam_beta1);
      read(s, "adam_beta2", c.train.adam_beta2);
      read(s, "adam_eps", c.train.adam_eps);
      read(s, "weight_decay", c.train.weight_decay);
      read(s, "seed", c.train.seed);
      if (s.contains("task")) c.train.task = parse_task(s.at("task").get<std::string>());
      read(s, "fixed_permutation", c.train.fixed_permutation);
    }
    read(j, "data", c.data);
    read(j, "eval_data", c.eval_data);
    read(j, "off_samples", c.off_samples);
    read(j, "split_train", c.split_train);
    read(j, "split_test", c.split_test);
    if (j.contains("labels_n") && !j.at("labels_n").is_null()) {
      c.labels_n = j.at("labels_n").get<std::size_t>();
    }
    if (j.contains("labels_frac") && !j.at("labels_frac").is_null()) {
      c.labels_frac = j.at("labels_frac").get<double>();
    }
    if (j.contains("svm")) {
      const auto& s = j.at("svm");
      read(s, "c_reg", c.svm.c_reg);
      read(s, "epochs", c.svm.epochs);
      read(s, "tolerance", c.svm.tolerance);
      read(s, "unit_norm", c.svm.unit_norm);
      read(s, "standardize", c.svm.standardize);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  c.jigsaw.validate();
  c.network.validate();
  c.train.validate();
  return c;
}

void RunConfig::resolve() {
  if (train.task == Task::kPretrain) {
    jigsaw.validate();
    network.num_point_classes = jigsaw.num_classes();
  }
}

}  // namespace jigsaw3d
