#include "jigsaw3d/jigsaw.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "jigsaw3d/errors.hpp"

namespace jigsaw3d {
namespace {

constexpr double kUnitCubeTolerance = 1e-9;

// Picks `count` distinct entries of `pool` uniformly (partial Fisher-Yates).
std::vector<VoxelId> choose_distinct(std::vector<VoxelId> pool, std::size_t count, Rng& rng) {
  count = std::min(count, pool.size());
  for (std::size_t j = 0; j < count; ++j) {
    const std::size_t r = j + static_cast<std::size_t>(rng.uniform_int(pool.size() - j));
    std::swap(pool[j], pool[r]);
  }
  pool.resize(count);
  return pool;
}

std::vector<VoxelId> destinations(const JigsawSample& sample) {
  std::vector<VoxelId> dest(sample.targets.size());
  for (std::size_t i = 0; i < dest.size(); ++i) dest[i] = sample.permutation(sample.targets[i]);
  return dest;
}

std::vector<VoxelId> distinct_sorted(std::vector<VoxelId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

void check_sample(const JigsawSample& sample, int k) {
  require(sample.shuffled.size() == sample.targets.size(),
          "JigsawSample: targets must align with points");
  require(sample.permutation.size() == static_cast<std::size_t>(k * k * k),
          "JigsawSample: permutation size differs from k^3");
}

}  // namespace

void JigsawConfig::validate() const {
  if (k < 1) throw ConfigError("jigsaw.k must be >= 1");
  if (!(rotate_fraction >= 0.0 && rotate_fraction <= 1.0)) {
    throw ConfigError("jigsaw.rotate_fraction must be in [0, 1]");
  }
  if (replace_count < 0) throw ConfigError("jigsaw.replace_count must be >= 0");
  if (!(jitter_sigma >= 0.0) || !(jitter_clip >= jitter_sigma)) {
    throw ConfigError("jigsaw: require jitter_clip >= jitter_sigma >= 0");
  }
}

JigsawConfig JigsawConfig::no_augmentation(int k) {
  JigsawConfig cfg;
  cfg.k = k;
  cfg.rotate_fraction = 0.0;
  cfg.replace_count = 0;
  cfg.jitter_sigma = 0.0;
  cfg.jitter_clip = 0.0;
  return cfg;
}

PointCloud scale_to_unit_cube(const PointCloud& cloud) {
  const BoundingBox box = bounding_box(cloud);
  std::vector<Point3> out;
  out.reserve(cloud.size());
  for (const auto& p : cloud) {
    Point3 q;
    for (int a = 0; a < 3; ++a) {
      const double extent = box.max[a] - box.min[a];
      q[a] = extent > 0.0 ? (p[a] - box.min[a]) / extent : 0.5;
    }
    out.push_back(q);
  }
  return PointCloud(std::move(out));
}

VoxelAssignment voxelize(const PointCloud& cloud, int k) {
  const VoxelGrid grid(k);
  VoxelAssignment out;
  out.ids.reserve(cloud.size());
  for (const auto& p : cloud) {
    for (int a = 0; a < 3; ++a) {
      require(p[a] >= -kUnitCubeTolerance && p[a] <= 1.0 + kUnitCubeTolerance,
              "voxelize: coordinate outside the unit cube");
    }
    out.ids.push_back(grid.voxel_of(p));
  }
  out.occupied = distinct_sorted(out.ids);
  return out;
}

VoxelPermutation sample_permutation(Rng& rng, int k) {
  require(k >= 1, "sample_permutation: k must be >= 1");
  std::vector<VoxelId> m(static_cast<std::size_t>(k * k * k));
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = static_cast<VoxelId>(i);
  for (std::size_t i = m.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(i + 1));
    std::swap(m[i], m[j]);
  }
  return VoxelPermutation(std::move(m));
}

PointCloud displace(const PointCloud& cloud, const VoxelAssignment& assignment,
                    const VoxelPermutation& perm, int k) {
  const VoxelGrid grid(k);
  require(assignment.ids.size() == cloud.size(), "displace: assignment does not match cloud");
  require(perm.size() == static_cast<std::size_t>(grid.num_voxels()),
          "displace: permutation size differs from k^3");
  std::vector<Point3> out;
  out.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const VoxelId src = assignment.ids[i];
    out.push_back(cloud[i] + (grid.center(perm(src)) - grid.center(src)));
  }
  return PointCloud(std::move(out));
}

void rotate_voxels(JigsawSample& sample, double rotate_fraction, int k, Rng& rng) {
  check_sample(sample, k);
  const VoxelGrid grid(k);
  const std::vector<VoxelId> dest = destinations(sample);
  // Small epsilon so e.g. 0.29 * 100 still counts as 29.
  const auto wanted =
      static_cast<std::size_t>(std::floor(rotate_fraction * grid.num_voxels() + 1e-9));
  const std::vector<VoxelId> chosen = choose_distinct(distinct_sorted(dest), wanted, rng);
  if (chosen.empty()) return;

  std::vector<Point3> points(sample.shuffled.begin(), sample.shuffled.end());
  for (VoxelId v : chosen) {
    const Rotation3 rot = random_rotation(rng);
    const Point3 c = grid.center(v);
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (dest[i] == v) points[i] = c + rot.apply(points[i] - c);
    }
  }
  sample.shuffled = PointCloud(std::move(points));
}

void replace_voxels(JigsawSample& sample, int replace_count, int k, const PointCloud& donor,
                    Rng& rng) {
  check_sample(sample, k);
  if (replace_count <= 0) return;
  const VoxelGrid grid(k);
  const std::vector<VoxelId> dest = destinations(sample);
  const std::vector<VoxelId> chosen =
      choose_distinct(distinct_sorted(dest), static_cast<std::size_t>(replace_count), rng);

  const PointCloud donor_unit = scale_to_unit_cube(donor);
  const VoxelAssignment donor_vox = voxelize(donor_unit, k);
  const VoxelPermutation inverse = sample.permutation.inverse();

  std::vector<char> removed(static_cast<std::size_t>(grid.num_voxels()), 0);
  for (VoxelId v : chosen) removed[static_cast<std::size_t>(v)] = 1;

  std::vector<Point3> points;
  std::vector<VoxelId> targets;
  points.reserve(sample.shuffled.size());
  targets.reserve(sample.shuffled.size());
  for (std::size_t i = 0; i < dest.size(); ++i) {
    if (removed[static_cast<std::size_t>(dest[i])]) continue;
    points.push_back(sample.shuffled[i]);
    targets.push_back(sample.targets[i]);
  }
  for (VoxelId v : chosen) {
    const VoxelId donor_voxel = donor_vox.occupied[static_cast<std::size_t>(
        rng.uniform_int(donor_vox.occupied.size()))];
    const Point3 offset = grid.center(v) - grid.center(donor_voxel);
    const VoxelId label = inverse(v);
    for (std::size_t j = 0; j < donor_unit.size(); ++j) {
      if (donor_vox.ids[j] != donor_voxel) continue;
      points.push_back(donor_unit[j] + offset);
      targets.push_back(label);
    }
  }
  sample.shuffled = PointCloud(std::move(points));
  sample.targets = std::move(targets);
}

void jitter_points(JigsawSample& sample, double sigma, double clip, Rng& rng) {
  if (sigma <= 0.0) return;
  std::vector<Point3> points(sample.shuffled.begin(), sample.shuffled.end());
  for (auto& p : points) {
    for (int a = 0; a < 3; ++a) p[a] += std::clamp(sigma * rng.gaussian(), -clip, clip);
  }
  sample.shuffled = PointCloud(std::move(points));
}

JigsawSample augment(JigsawSample sample, const JigsawConfig& cfg, Rng& rng,
                     const PointCloud* donor) {
  cfg.validate();
  check_sample(sample, cfg.k);
  if (cfg.replace_count > 0 && donor == nullptr) {
    throw ConfigError("augment: replace_count > 0 requires a donor cloud");
  }
  Rng rotation_rng = rng.split();
  Rng replacement_rng = rng.split();
  Rng jitter_rng = rng.split();

  if (cfg.rotate_fraction > 0.0) rotate_voxels(sample, cfg.rotate_fraction, cfg.k, rotation_rng);
  if (cfg.replace_count > 0) {
    replace_voxels(sample, cfg.replace_count, cfg.k, *donor, replacement_rng);
  }
  if (cfg.jitter_sigma > 0.0) {
    jitter_points(sample, cfg.jitter_sigma, cfg.jitter_clip, jitter_rng);
  }
  return sample;
}

JigsawSample make_jigsaw_sample(const PointCloud& cloud, const JigsawConfig& cfg, Rng& rng,
                                const PointCloud* donor) {
  cfg.validate();
  VoxelPermutation perm = sample_permutation(rng, cfg.k);
  return make_jigsaw_sample(cloud, cfg, perm, rng, donor);
}

JigsawSample make_jigsaw_sample(const PointCloud& cloud, const JigsawConfig& cfg,
                                const VoxelPermutation& perm, Rng& rng,
                                const PointCloud* donor) {
  cfg.validate();
  const PointCloud unit = scale_to_unit_cube(cloud);
  VoxelAssignment assignment = voxelize(unit, cfg.k);
  PointCloud shuffled = displace(unit, assignment, perm, cfg.k);
  JigsawSample sample{std::move(shuffled), std::move(assignment.ids), perm};
  return augment(std::move(sample), cfg, rng, donor);
}

}  // namespace jigsaw3d
