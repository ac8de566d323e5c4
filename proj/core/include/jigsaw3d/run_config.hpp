#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "jigsaw3d/downstream.hpp"
#include "jigsaw3d/jigsaw.hpp"
#include "jigsaw3d/net.hpp"
#include "jigsaw3d/train.hpp"

namespace jigsaw3d {

inline constexpr int kRunConfigFormatVersion = 1;

// Everything a CLI run depends on. Serialized as versioned JSON.
struct RunConfig {
  int format_version = kRunConfigFormatVersion;
  JigsawConfig jigsaw;
  NetworkConfig network;
  TrainConfig train;

  std::string data;       // "synth:..." or directory
  std::string eval_data;  // optional second dataset for transfer
  std::size_t off_samples = 1024;

  std::string split_train = "train";
  std::string split_test = "test";
  std::optional<std::size_t> labels_n;
  std::optional<double> labels_frac;
  SvmOptions svm;

  std::string to_json() const;
  // Missing keys keep their defaults; an unknown format_version or a mistyped
  // field throws ConfigError.
  static RunConfig from_json(const std::string& text);

  // NetworkConfig.num_point_classes follows k^3 for pretraining.
  void resolve();
};

}  // namespace jigsaw3d
