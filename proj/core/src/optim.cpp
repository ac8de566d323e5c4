#include "jigsaw3d/optim.hpp"

#include <cmath>

#include "jigsaw3d/errors.hpp"

namespace jigsaw3d {

AdamState AdamState::for_parameters(const Parameters& params) {
  AdamState s;
  for (const auto& t : params.tensors()) {
    s.m.emplace_back(t.tensor->rows(), t.tensor->cols());
    s.v.emplace_back(t.tensor->rows(), t.tensor->cols());
  }
  return s;
}

void adam_step(Parameters& params, const Parameters& grads, AdamState& state,
               const AdamOptions& opts) {
  auto ps = params.tensors();
  const auto gs = grads.tensors();
  require(ps.size() == gs.size() && ps.size() == state.m.size() && ps.size() == state.v.size(),
          "adam_step: parameter/gradient/state structure mismatch");
  state.step += 1;
  const auto t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(opts.beta1, t);
  const double bc2 = 1.0 - std::pow(opts.beta2, t);
  for (std::size_t k = 0; k < ps.size(); ++k) {
    auto p = ps[k].tensor->data();
    auto g = gs[k].tensor->data();
    auto m = state.m[k].data();
    auto v = state.v[k].data();
    require(p.size() == g.size() && p.size() == m.size(), "adam_step: shape mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = opts.beta1 * m[i] + (1.0 - opts.beta1) * g[i];
      v[i] = opts.beta2 * v[i] + (1.0 - opts.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      double update = opts.learning_rate * m_hat / (std::sqrt(v_hat) + opts.eps);
      if (opts.weight_decay != 0.0) update += opts.learning_rate * opts.weight_decay * p[i];
      p[i] -= update;
    }
  }
}

}  // namespace jigsaw3d
