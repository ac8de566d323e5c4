#include <cmath>

#include "jigsaw3d/downstream.hpp"
#include "jigsaw3d/errors.hpp"

namespace jigsaw3d {
namespace {

double normalize(std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  s = std::sqrt(s);
  if (s > 0.0) {
    for (double& x : v) x /= s;
  }
  return s;
}

}  // namespace

std::vector<std::array<double, 2>> pca_2d(std::span<const std::vector<double>> rows, Rng& rng,
                                          int iterations) {
  require(!rows.empty(), "pca_2d: no rows");
  const std::size_t n = rows.size();
  const std::size_t dim = rows.front().size();
  std::vector<double> mean(dim, 0.0);
  for (const auto& r : rows) {
    require(r.size() == dim, "pca_2d: ragged rows");
    for (std::size_t d = 0; d < dim; ++d) mean[d] += r[d];
  }
  for (double& m : mean) m /= static_cast<double>(n);
  std::vector<std::vector<double>> centered(n, std::vector<double>(dim));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < dim; ++d) centered[i][d] = rows[i][d] - mean[d];
  }

  // v <- X^T X v, orthogonalized against earlier directions.
  std::vector<std::vector<double>> dirs;
  for (int k = 0; k < 2; ++k) {
    std::vector<double> v(dim);
    for (double& x : v) x = rng.gaussian();
    auto orthogonalize = [&](std::vector<double>& u) {
      for (const auto& prev : dirs) {
        double p = 0.0;
        for (std::size_t d = 0; d < dim; ++d) p += u[d] * prev[d];
        for (std::size_t d = 0; d < dim; ++d) u[d] -= p * prev[d];
      }
    };
    orthogonalize(v);
    normalize(v);
    for (int it = 0; it < iterations; ++it) {
      std::vector<double> next(dim, 0.0);
      for (const auto& r : centered) {
        double p = 0.0;
        for (std::size_t d = 0; d < dim; ++d) p += r[d] * v[d];
        for (std::size_t d = 0; d < dim; ++d) next[d] += p * r[d];
      }
      orthogonalize(next);
      if (normalize(next) == 0.0) {
        std::fill(v.begin(), v.end(), 0.0);
        break;
      }
      v = std::move(next);
    }
    std::size_t big = 0;
    for (std::size_t d = 1; d < dim; ++d) {
      if (std::abs(v[d]) > std::abs(v[big])) big = d;
    }
    if (v[big] < 0.0) {
      for (double& x : v) x = -x;
    }
    dirs.push_back(std::move(v));
  }

  std::vector<std::array<double, 2>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < 2; ++k) {
      double p = 0.0;
      for (std::size_t d = 0; d < dim; ++d) p += centered[i][d] * dirs[static_cast<std::size_t>(k)][d];
      out[i][static_cast<std::size_t>(k)] = p;
    }
  }
  return out;
}

}  // namespace jigsaw3d
