#include "jigsaw3d/loss.hpp"

#include <algorithm>
#include <cmath>

#include "jigsaw3d/errors.hpp"

namespace jigsaw3d {

LossAndGrad cross_entropy_per_point(const Tensor2& logits, std::span<const int> targets) {
  const std::size_t n = logits.rows();
  const std::size_t classes = logits.cols();
  require(n >= 1 && classes >= 1, "cross_entropy_per_point: empty logits");
  require(targets.size() == n, "cross_entropy_per_point: one target per row required");

  LossAndGrad out{0.0, Tensor2(n, classes)};
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int t = targets[i];
    require(t >= 0 && static_cast<std::size_t>(t) < classes,
            "cross_entropy_per_point: target out of range");
    auto row = logits.row(i);
    const double m = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double v : row) z += std::exp(v - m);
    const double log_z = m + std::log(z);
    out.loss += log_z - row[static_cast<std::size_t>(t)];
    auto g = out.grad.row(i);
    for (std::size_t c = 0; c < classes; ++c) g[c] = std::exp(row[c] - log_z) * inv_n;
    g[static_cast<std::size_t>(t)] -= inv_n;
  }
  out.loss *= inv_n;
  return out;
}

}  // namespace jigsaw3d
