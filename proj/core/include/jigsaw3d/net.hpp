#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jigsaw3d/geometry.hpp"
#include "jigsaw3d/rng.hpp"
#include "jigsaw3d/tensor.hpp"

namespace jigsaw3d {

// PointNet-style segmentation network:
//
//   per point:  f_i = enc(p_i)               (ReLU MLP, last width embed_dim)
//   global:     g   = max_i f_i              (channelwise; ties -> lowest i)
//   per point:  logits_i = head([f_i, g, condition])   (ReLU MLP, linear out)
//
// An optional linear classifier on g is attached for object classification.
struct NetworkConfig {
  std::vector<int> encoder_widths{64, 64, 128};
  int embed_dim = 256;
  std::vector<int> head_widths{128};
  int num_point_classes = 27;
  int condition_dim = 0;

  int head_input_dim() const { return 2 * embed_dim + condition_dim; }

  void validate() const;

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

// Dimensions are (fan_in x fan_out) for weights, (1 x fan_out) for biases.
struct Layer {
  Tensor2 weight;
  Tensor2 bias;

  friend bool operator==(const Layer&, const Layer&) = default;
};

struct Parameters {
  NetworkConfig config;
  std::vector<Layer> encoder;  // encoder_widths.size() + 1 layers
  std::vector<Layer> head;     // head_widths.size() + 1 layers
  std::optional<Layer> classifier;

  struct NamedTensor {
    std::string name;
    Tensor2* tensor;
  };
  struct ConstNamedTensor {
    std::string name;
    const Tensor2* tensor;
  };

  // Stable order: encoder.0.weight, encoder.0.bias, ..., head.*, classifier.*
  std::vector<NamedTensor> tensors();
  std::vector<ConstNamedTensor> tensors() const;

  // Same structure, every entry zero. Used as a gradient accumulator.
  Parameters zeros_like() const;

  std::size_t num_scalars() const;
  bool all_finite() const;
  int num_object_classes() const;

  // this += scale * other (structures must match).
  void add_scaled(const Parameters& other, double scale);

  friend bool operator==(const Parameters&, const Parameters&) = default;
};

// Uniform(-s, s) weights with s = sqrt(6 / (fan_in + fan_out)), zero biases.
Parameters init_parameters(const NetworkConfig& cfg, Rng& rng);

struct ForwardOutput {
  Tensor2 logits;                   // n x num_point_classes
  std::vector<double> embedding;    // embed_dim
  std::vector<std::size_t> argmax;  // winning point per embedding channel
};

// Intermediate activations kept for the backward pass.
struct ForwardTrace {
  Tensor2 input;                   // n x 3
  std::vector<Tensor2> encoder;    // post-ReLU output of every encoder layer
  std::vector<double> embedding;
  std::vector<std::size_t> argmax;
  std::vector<double> condition;
  std::vector<Tensor2> head;       // post-ReLU output of hidden head layers
  Tensor2 logits;                  // empty when the head was skipped
  std::vector<double> class_logits;  // empty without classifier
};

using Condition = std::span<const double>;

// Throws ContractViolation if condition length != condition_dim.
ForwardOutput forward(const Parameters& params, const PointCloud& cloud,
                      Condition condition = {});

std::vector<double> extract_embedding(const Parameters& params, const PointCloud& cloud);

ForwardTrace forward_trace(const Parameters& params, const PointCloud& cloud,
                           Condition condition, bool run_head, bool run_classifier);

// Accumulates d(loss)/d(params) into `grads`. Either upstream may be null.
void backward(const Parameters& params, const ForwardTrace& trace,
              const Tensor2* logit_grads, std::span<const double> class_logit_grads,
              Parameters& grads);

// Gradients for per-point logits only, computed from a fresh forward pass.
Parameters backward(const Parameters& params, const PointCloud& cloud, Condition condition,
                    const Tensor2& upstream_logit_grads);

// Keeps the encoder bitwise; reinitializes the head for a new class count
// (and optionally a new conditioning width). Drops any classifier.
Parameters swap_head(const Parameters& params, int new_num_point_classes, Rng& rng,
                     std::optional<int> new_condition_dim = std::nullopt);

// Adds (or replaces) a linear classifier embed_dim -> num_classes.
Parameters attach_classifier(const Parameters& params, int num_classes, Rng& rng);

// Class logits from the classifier; requires params.classifier.
std::vector<double> classify(const Parameters& params, const PointCloud& cloud);

// One-hot vector of width `dim` with a 1 at `index`.
std::vector<double> one_hot(int index, int dim);

// FNV-1a over every parameter's bytes; used to assert immutability.
std::uint64_t checksum(const Parameters& params);

}  // namespace jigsaw3d
