#pragma once

#include <span>

#include "jigsaw3d/tensor.hpp"

namespace jigsaw3d {

struct LossAndGrad {
  double loss = 0.0;
  Tensor2 grad;  // same shape as the logits
};

// Mean over rows of -log softmax(logits_i)[target_i], max-subtracted.
// grad = (softmax - onehot) / n. Targets outside [0, cols) throw
// ContractViolation.
LossAndGrad cross_entropy_per_point(const Tensor2& logits, std::span<const int> targets);

}  // namespace jigsaw3d
