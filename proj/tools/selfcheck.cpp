#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "cli.hpp"
#include "jigsaw3d/checkpoint.hpp"
#include "jigsaw3d/downstream.hpp"
#include "jigsaw3d/jigsaw.hpp"
#include "jigsaw3d/loss.hpp"
#include "jigsaw3d/net.hpp"
#include "jigsaw3d/synth.hpp"

namespace jigsaw3d::cli {
namespace {

std::vector<Point3> uniform_points(Rng& rng, std::size_t n) {
  std::vector<Point3> pts(n);
  for (auto& p : pts) p = {rng.uniform(), rng.uniform(), rng.uniform()};
  return pts;
}

// Linear search over every voxel's half-open box.
int voxel_by_search(const Point3& p, int k) {
  for (int id = 0; id < k * k * k; ++id) {
    const int idx[3] = {id % k, (id / k) % k, id / (k * k)};
    bool in = true;
    for (int a = 0; a < 3; ++a) {
      const double lo = static_cast<double>(idx[a]) / k, hi = static_cast<double>(idx[a] + 1) / k;
      in = in && p[a] >= lo && (p[a] < hi || (idx[a] == k - 1 && p[a] <= 1.0));
    }
    if (in) return id;
  }
  return -1;
}

bool check_voxelize() {
  Rng rng(1);
  for (int k = 1; k <= 4; ++k) {
    for (int t = 0; t < 50; ++t) {
      const auto pts = uniform_points(rng, 64);
      const VoxelAssignment va = voxelize(PointCloud(pts), k);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (va.ids[i] != voxel_by_search(pts[i], k)) return false;
      }
    }
  }
  return true;
}

bool check_round_trip() {
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    const PointCloud c(uniform_points(rng, 64));
    const VoxelPermutation p = sample_permutation(rng, 3);
    const VoxelAssignment va = voxelize(c, 3);
    const PointCloud moved = displace(c, va, p, 3);
    VoxelAssignment moved_ids{{}, {}};
    for (VoxelId s : va.ids) moved_ids.ids.push_back(p(s));
    const PointCloud back = displace(moved, moved_ids, p.inverse(), 3);
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (distance(back[i], c[i]) > 1e-9) return false;
    }
  }
  return true;
}

NetworkConfig tiny_net() {
  NetworkConfig n;
  n.encoder_widths = {8, 8};
  n.embed_dim = 16;
  n.head_widths = {8};
  n.num_point_classes = 8;
  return n;
}

bool check_permutation_invariance() {
  Rng rng(3);
  const Parameters p = init_parameters(tiny_net(), rng);
  for (int t = 0; t < 3; ++t) {
    const auto pts = uniform_points(rng, 32);
    const ForwardOutput base = forward(p, PointCloud(pts));
    for (int r = 0; r < 10; ++r) {
      std::vector<std::size_t> order(pts.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      for (std::size_t i = order.size(); i-- > 1;) {
        std::swap(order[i], order[static_cast<std::size_t>(rng.uniform_int(i + 1))]);
      }
      std::vector<Point3> q;
      for (std::size_t i : order) q.push_back(pts[i]);
      const ForwardOutput out = forward(p, PointCloud(q));
      if (out.embedding != base.embedding) return false;
      for (std::size_t i = 0; i < order.size(); ++i) {
        for (std::size_t j = 0; j < out.logits.cols(); ++j) {
          if (out.logits(i, j) != base.logits(order[i], j)) return false;
        }
      }
    }
  }
  return true;
}

bool check_gradients() {
  Rng rng(4);
  Parameters p = init_parameters(tiny_net(), rng);
  const PointCloud c(uniform_points(rng, 16));
  std::vector<int> t(16);
  for (int& v : t) v = static_cast<int>(rng.uniform_int(8));
  auto loss = [&](const Parameters& q) { return cross_entropy_per_point(forward(q, c).logits, t).loss; };
  const LossAndGrad lg = cross_entropy_per_point(forward(p, c).logits, t);
  const Parameters g = backward(p, c, {}, lg.grad);
  auto pt = p.tensors();
  const auto gt = g.tensors();
  double worst = 0.0;
  for (std::size_t k = 0; k < pt.size(); ++k) {
    auto data = pt[k].tensor->data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double keep = data[i];
      data[i] = keep + 1e-5;
      const double up = loss(p);
      data[i] = keep - 1e-5;
      const double down = loss(p);
      data[i] = keep;
      const double fd = (up - down) / 2e-5;
      const double an = gt[k].tensor->data()[i];
      worst = std::max(worst, std::abs(fd - an) / std::max(1e-8, std::abs(fd) + std::abs(an)));
    }
  }
  return worst < 1e-4;
}

bool check_loss() {
  const Tensor2 z(3, 27, 0.0);
  const std::vector<int> t{0, 1, 2};
  return std::abs(cross_entropy_per_point(z, t).loss - std::log(27.0)) < 1e-12;
}

bool check_metrics() {
  const std::vector<int> a{0, 1, 1, 2};
  const std::map<int, std::vector<int>> parts{{0, {0, 1, 2}}};
  const std::vector<std::vector<int>> seg{a};
  const std::vector<int> cls{0};
  const std::vector<std::vector<int>> swapped{{1, 0, 0, 2}};
  return accuracy(a, a) == 1.0 && mean_iou(seg, seg, parts, cls) == 100.0 &&
         mean_iou(swapped, seg, parts, cls) < 100.0;
}

bool check_checkpoint() {
  Rng rng(5);
  const Checkpoint c{kCheckpointFormatVersion, init_parameters(tiny_net(), rng), 7, 9};
  const std::string bytes = serialize_checkpoint(c);
  return serialize_checkpoint(deserialize_checkpoint(bytes)) == bytes &&
         checksum(deserialize_checkpoint(bytes).params) == checksum(c.params);
}

bool check_few_shot() {
  SynthSpec s;
  s.per_class_count = 6;
  s.points_per_cloud = 16;
  const Dataset d = synthesize_dataset(s);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const FewShotPlan plan = few_shot_sample(d, "train", 4, rng);
    if (plan.per_class_counts.size() != 4) return false;
  }
  return true;
}

}  // namespace

int selfcheck(bool verbose) {
  const std::vector<std::pair<std::string, std::function<bool()>>> checks{
      {"voxelize matches interval search", check_voxelize},
      {"displace round trip", check_round_trip},
      {"permutation invariance", check_permutation_invariance},
      {"gradients match finite differences", check_gradients},
      {"cross-entropy of uniform logits", check_loss},
      {"metric identities", check_metrics},
      {"checkpoint round trip", check_checkpoint},
      {"few-shot covers every class", check_few_shot},
  };
  int failures = 0;
  for (const auto& [name, fn] : checks) {
    bool ok = false;
    try {
      ok = fn();
    } catch (const std::exception& e) {
      if (verbose) std::cout << "  exception: " << e.what() << "\n";
    }
    if (!ok) ++failures;
    std::cout << (ok ? "ok   " : "FAIL ") << name << "\n";
  }
  return failures;
}

}  // namespace jigsaw3d::cli
