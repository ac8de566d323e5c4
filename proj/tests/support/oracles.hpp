#pragma once

// Brute-force reference implementations. Each one follows the definition
// directly and shares no code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "jigsaw3d/geometry.hpp"
#include "jigsaw3d/net.hpp"
#include "jigsaw3d/tensor.hpp"

namespace oracle {

// Tests the point against every voxel's half-open box; the top face of the
// unit cube belongs to the last cell on each axis. Returns -1 if no voxel
// claims the point.
inline int voxel_id(const jigsaw3d::Point3& p, int k) {
  int found = -1;
  for (int iz = 0; iz < k; ++iz) {
    for (int iy = 0; iy < k; ++iy) {
      for (int ix = 0; ix < k; ++ix) {
        const int idx[3] = {ix, iy, iz};
        bool inside = true;
        for (int a = 0; a < 3; ++a) {
          const double lo = static_cast<double>(idx[a]) / k;
          const double hi = static_cast<double>(idx[a] + 1) / k;
          const bool last = idx[a] == k - 1;
          const double c = p[a];
          const bool in = last ? (c >= lo && c <= 1.0 + 1e-9) : (c >= lo && c < hi);
          const bool below_first = idx[a] == 0 && c < 0.0 && c >= -1e-9;
          inside = inside && (in || below_first);
        }
        if (inside) {
          if (found != -1) return -2;  // claimed twice: partition broken
          found = ix + k * iy + k * k * iz;
        }
      }
    }
  }
  return found;
}

inline std::vector<jigsaw3d::Point3> unit_scale(const std::vector<jigsaw3d::Point3>& pts) {
  double lo[3], hi[3];
  for (int a = 0; a < 3; ++a) {
    lo[a] = pts[0][a];
    hi[a] = pts[0][a];
    for (const auto& p : pts) {
      if (p[a] < lo[a]) lo[a] = p[a];
      if (p[a] > hi[a]) hi[a] = p[a];
    }
  }
  std::vector<jigsaw3d::Point3> out(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (int a = 0; a < 3; ++a) {
      out[i][a] = hi[a] > lo[a] ? (pts[i][a] - lo[a]) / (hi[a] - lo[a]) : 0.5;
    }
  }
  return out;
}

inline double accuracy(const std::vector<int>& pred, const std::vector<int>& gt) {
  long hits = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (pred[i] == gt[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(gt.size());
}

// Per cloud and part: IoU from explicit index sets.
inline double mean_iou(const std::vector<std::vector<int>>& pred,
                       const std::vector<std::vector<int>>& gt,
                       const std::map<int, std::vector<int>>& parts_per_class,
                       const std::vector<int>& cls) {
  std::map<int, std::vector<double>> per_class;
  for (std::size_t c = 0; c < gt.size(); ++c) {
    const auto& parts = parts_per_class.at(cls[c]);
    double sum = 0.0;
    for (int part : parts) {
      std::set<std::size_t> g, p;
      for (std::size_t j = 0; j < gt[c].size(); ++j) {
        if (gt[c][j] == part) g.insert(j);
        if (pred[c][j] == part) p.insert(j);
      }
      std::set<std::size_t> uni = g;
      uni.insert(p.begin(), p.end());
      std::size_t inter = 0;
      for (std::size_t j : g) inter += p.count(j);
      sum += uni.empty() ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni.size());
    }
    per_class[cls[c]].push_back(sum / static_cast<double>(parts.size()));
  }
  double total = 0.0;
  for (const auto& [k, v] : per_class) {
    double s = 0.0;
    for (double x : v) s += x;
    total += s / static_cast<double>(v.size());
  }
  return 100.0 * total / static_cast<double>(per_class.size());
}

// Mean cross-entropy in long double, no max subtraction needed for the
// moderate logits used in tests.
inline long double cross_entropy(const jigsaw3d::Tensor2& logits, const std::vector<int>& t) {
  long double total = 0.0L;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    long double z = 0.0L;
    for (std::size_t j = 0; j < logits.cols(); ++j) z += std::exp((long double)logits(i, j));
    total += std::log(z) - (long double)logits(i, static_cast<std::size_t>(t[i]));
  }
  return total / static_cast<long double>(logits.rows());
}

// Central difference of `loss` with respect to every scalar of `params`.
inline jigsaw3d::Parameters finite_difference(
    const jigsaw3d::Parameters& params,
    const std::function<double(const jigsaw3d::Parameters&)>& loss, double h) {
  jigsaw3d::Parameters probe = params;
  jigsaw3d::Parameters out = params.zeros_like();
  auto probe_t = probe.tensors();
  auto out_t = out.tensors();
  for (std::size_t t = 0; t < probe_t.size(); ++t) {
    auto data = probe_t[t].tensor->data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double keep = data[i];
      data[i] = keep + h;
      const double up = loss(probe);
      data[i] = keep - h;
      const double down = loss(probe);
      data[i] = keep;
      out_t[t].tensor->data()[i] = (up - down) / (2.0 * h);
    }
  }
  return out;
}

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max(1e-8, std::abs(a) + std::abs(b));
}

}  // namespace oracle
