#pragma once

#include <cstddef>
#include <vector>

#include "jigsaw3d/geometry.hpp"
#include "jigsaw3d/net.hpp"
#include "jigsaw3d/rng.hpp"

namespace fixtures {

inline std::vector<jigsaw3d::Point3> random_points(jigsaw3d::Rng& rng, std::size_t n,
                                                   double lo = -1.0, double hi = 1.0) {
  std::vector<jigsaw3d::Point3> pts(n);
  for (auto& p : pts) p = {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
  return pts;
}

inline jigsaw3d::PointCloud random_cloud(jigsaw3d::Rng& rng, std::size_t n, double lo = -1.0,
                                         double hi = 1.0) {
  return jigsaw3d::PointCloud(random_points(rng, n, lo, hi));
}

inline std::vector<std::size_t> random_order(jigsaw3d::Rng& rng, std::size_t n) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(i))]);
  }
  return order;
}

inline jigsaw3d::NetworkConfig small_net(int classes = 8, int condition_dim = 0) {
  jigsaw3d::NetworkConfig cfg;
  cfg.encoder_widths = {8, 8};
  cfg.embed_dim = 16;
  cfg.head_widths = {8};
  cfg.num_point_classes = classes;
  cfg.condition_dim = condition_dim;
  return cfg;
}

}  // namespace fixtures
