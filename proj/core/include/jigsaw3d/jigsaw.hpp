#pragma once

#include <vector>

#include "jigsaw3d/geometry.hpp"
#include "jigsaw3d/rng.hpp"
#include "jigsaw3d/voxel.hpp"

namespace jigsaw3d {

// Label generation and augmentation for the voxel-shuffle pretext task.
//
// Augmentation runs in a fixed order: voxel rotation, voxel replacement,
// per-point jitter. Each stage draws from its own child generator split off
// the caller's Rng, so toggling one stage never changes the draws of another.
struct JigsawConfig {
  int k = 3;
  // Fraction of the k^3 voxels (rounded down) that get a random rotation.
  // Only occupied voxels are candidates.
  double rotate_fraction = 0.15;
  // Destination voxels replaced by a voxel taken from a donor cloud.
  int replace_count = 1;
  double jitter_sigma = 0.01;
  double jitter_clip = 0.05;

  int num_classes() const { return k * k * k; }

  // Throws ConfigError on an out-of-range field.
  void validate() const;

  // Every augmentation stage disabled.
  static JigsawConfig no_augmentation(int k);
};

struct VoxelAssignment {
  std::vector<VoxelId> ids;
  // Distinct values of ids, ascending.
  std::vector<VoxelId> occupied;
};

struct JigsawSample {
  PointCloud shuffled;
  // Original voxel of every point of `shuffled`.
  std::vector<VoxelId> targets;
  VoxelPermutation permutation;
};

// Per-axis affine map of the bounding box onto [0,1]^3. An axis with zero
// extent maps to 0.5.
PointCloud scale_to_unit_cube(const PointCloud& cloud);

// Coordinates must lie in [0,1] up to 1e-9; anything further out throws
// ContractViolation.
VoxelAssignment voxelize(const PointCloud& cloud, int k);

// Fisher-Yates over all k^3 voxel ids, empty voxels included.
VoxelPermutation sample_permutation(Rng& rng, int k);

// Translates every point by center(perm(id)) - center(id).
PointCloud displace(const PointCloud& cloud, const VoxelAssignment& assignment,
                    const VoxelPermutation& perm, int k);

// Individual augmentation stages. Each keeps targets aligned with points.
void rotate_voxels(JigsawSample& sample, double rotate_fraction, int k, Rng& rng);
void replace_voxels(JigsawSample& sample, int replace_count, int k,
                    const PointCloud& donor, Rng& rng);
void jitter_points(JigsawSample& sample, double sigma, double clip, Rng& rng);

// All three stages. `donor` must be non-null iff cfg.replace_count > 0
// (ConfigError otherwise).
JigsawSample augment(JigsawSample sample, const JigsawConfig& cfg, Rng& rng,
                     const PointCloud* donor);

// scale_to_unit_cube -> voxelize -> sample_permutation -> displace -> augment.
JigsawSample make_jigsaw_sample(const PointCloud& cloud, const JigsawConfig& cfg,
                                Rng& rng, const PointCloud* donor = nullptr);

// Same pipeline with the permutation supplied by the caller instead of drawn.
JigsawSample make_jigsaw_sample(const PointCloud& cloud, const JigsawConfig& cfg,
                                const VoxelPermutation& perm, Rng& rng,
                                const PointCloud* donor = nullptr);

}  // namespace jigsaw3d
