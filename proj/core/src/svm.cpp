#include "jigsaw3d/downstream.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "jigsaw3d/errors.hpp"

namespace jigsaw3d {
namespace {

std::vector<double> unit_normalized(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  std::vector<double> out(x.begin(), x.end());
  if (s > 0.0) {
    const double inv = 1.0 / std::sqrt(s);
    for (double& v : out) v *= inv;
  }
  return out;
}

}  // namespace

std::vector<double> LinearClassifier::scores(std::span<const double> x) const {
  require(x.size() == static_cast<std::size_t>(dim), "LinearClassifier: dimension mismatch");
  std::vector<double> normalized;
  if (unit_norm) {
    normalized = unit_normalized(x);
    x = normalized;
  }
  std::vector<double> s(biases);
  for (int c = 0; c < num_classes; ++c) {
    const double* w = weights.data() + static_cast<std::size_t>(c) * static_cast<std::size_t>(dim);
    double acc = 0.0;
    for (int d = 0; d < dim; ++d) acc += w[d] * x[static_cast<std::size_t>(d)];
    s[static_cast<std::size_t>(c)] += acc;
  }
  return s;
}

int LinearClassifier::predict(std::span<const double> x) const {
  const std::vector<double> s = scores(x);
  return static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin());
}

LinearClassifier fit_linear_svm(std::span<const std::vector<double>> embeddings,
                                std::span<const int> labels, const SvmOptions& opts, Rng& rng) {
  require(embeddings.size() == labels.size(), "fit_linear_svm: one label per embedding");
  if (!(opts.c_reg > 0.0)) throw ConfigError("svm: C must be > 0");
  if (opts.epochs < 1) throw ConfigError("svm: epochs must be >= 1");
  if (!(opts.tolerance > 0.0)) throw ConfigError("svm: tolerance must be > 0");
  const std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) throw ConfigError("fit_linear_svm: at least two classes required");
  require(*distinct.begin() >= 0, "fit_linear_svm: negative class label");

  const std::size_t n = embeddings.size();
  const std::size_t dim = embeddings.front().size();
  std::vector<std::vector<double>> x;
  x.reserve(n);
  for (const auto& e : embeddings) {
    require(e.size() == dim, "fit_linear_svm: ragged embeddings");
    for (double v : e) require(std::isfinite(v), "fit_linear_svm: non-finite embedding");
    x.push_back(opts.unit_norm ? unit_normalized(e) : e);
  }

  std::vector<double> mean(dim, 0.0);
  std::vector<double> scale(dim, 1.0);
  if (opts.standardize) {
    for (const auto& row : x) {
      for (std::size_t d = 0; d < dim; ++d) mean[d] += row[d];
    }
    for (double& m : mean) m /= static_cast<double>(n);
    std::vector<double> var(dim, 0.0);
    for (const auto& row : x) {
      for (std::size_t d = 0; d < dim; ++d) var[d] += (row[d] - mean[d]) * (row[d] - mean[d]);
    }
    for (std::size_t d = 0; d < dim; ++d) {
      const double sd = std::sqrt(var[d] / static_cast<double>(n));
      scale[d] = sd > 1e-12 ? sd : 1.0;
    }
  }
  // z = [(x - mean) / scale, 1]
  const std::size_t zdim = dim + 1;
  std::vector<double> z(n * zdim);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < dim; ++d) z[i * zdim + d] = (x[i][d] - mean[d]) / scale[d];
    z[i * zdim + dim] = 1.0;
  }

  // Dual coordinate descent on
  //   min_w 1/2 |w|^2 + (C / n) sum_i max(0, 1 - y_i w.z_i)
  // i.e. box constraints 0 <= alpha_i <= C / n. Scaling by n makes the
  // optimum invariant to duplicating every sample.
  const int num_classes = *distinct.rbegin() + 1;
  const double upper = opts.c_reg / static_cast<double>(n);
  std::vector<double> qii(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < zdim; ++d) qii[i] += z[i * zdim + d] * z[i * zdim + d];
  }
  // Pass p visits samples in an order drawn from stream (order_seed, p), so
  // every class problem sees the same sequence.
  const std::uint64_t order_seed = rng.next_u64();
  auto pass_order = [&](int pass, std::vector<std::size_t>& order) {
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng r = Rng::stream(order_seed, static_cast<std::uint64_t>(pass));
    for (std::size_t i = n; i-- > 1;) {
      std::swap(order[i], order[static_cast<std::size_t>(r.uniform_int(i + 1))]);
    }
  };

  LinearClassifier out;
  out.num_classes = num_classes;
  out.dim = static_cast<int>(dim);
  out.c_reg = opts.c_reg;
  out.unit_norm = opts.unit_norm;
  out.weights.assign(static_cast<std::size_t>(num_classes) * dim, 0.0);
  out.biases.assign(static_cast<std::size_t>(num_classes), 0.0);

  std::vector<double> w(zdim);
  std::vector<double> alpha(n);
  std::vector<std::size_t> order(n);
  for (int c = 0; c < num_classes; ++c) {
    std::fill(w.begin(), w.end(), 0.0);
    std::fill(alpha.begin(), alpha.end(), 0.0);
    for (int pass = 0; pass < opts.epochs; ++pass) {
      pass_order(pass, order);
      double pg_max = -HUGE_VAL;
      double pg_min = HUGE_VAL;
      for (std::size_t i : order) {
        if (qii[i] <= 0.0) continue;
        const double* zi = z.data() + i * zdim;
        const double y = labels[i] == c ? 1.0 : -1.0;
        double wz = 0.0;
        for (std::size_t d = 0; d < zdim; ++d) wz += w[d] * zi[d];
        const double g = y * wz - 1.0;
        double pg = g;
        if (alpha[i] <= 0.0) pg = std::min(g, 0.0);
        else if (alpha[i] >= upper) pg = std::max(g, 0.0);
        pg_max = std::max(pg_max, pg);
        pg_min = std::min(pg_min, pg);
        if (pg == 0.0) continue;
        const double next = std::clamp(alpha[i] - g / qii[i], 0.0, upper);
        const double step = (next - alpha[i]) * y;
        alpha[i] = next;
        for (std::size_t d = 0; d < zdim; ++d) w[d] += step * zi[d];
      }
      if (pg_max - pg_min < opts.tolerance) break;
    }
    double bias = w[dim];
    double* wc = out.weights.data() + static_cast<std::size_t>(c) * dim;
    for (std::size_t d = 0; d < dim; ++d) {
      wc[d] = w[d] / scale[d];
      bias -= wc[d] * mean[d];
    }
    out.biases[static_cast<std::size_t>(c)] = bias;
  }
  return out;
}

}  // namespace jigsaw3d
