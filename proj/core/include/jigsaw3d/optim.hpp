#pragma once

#include <cstdint>
#include <vector>

#include "jigsaw3d/net.hpp"

namespace jigsaw3d {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // Decoupled (AdamW-style) decay; 0 disables it.
  double weight_decay = 0.0;
};

struct AdamState {
  std::vector<Tensor2> m;
  std::vector<Tensor2> v;
  std::int64_t step = 0;

  static AdamState for_parameters(const Parameters& params);
};

// One bias-corrected Adam update. state.step is incremented first, so the
// first call uses t = 1.
void adam_step(Parameters& params, const Parameters& grads, AdamState& state,
               const AdamOptions& opts);

}  // namespace jigsaw3d
