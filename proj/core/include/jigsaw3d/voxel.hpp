#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "jigsaw3d/geometry.hpp"

namespace jigsaw3d {

// Voxel identifier in [0, k^3). Layout is x-fastest:
// id = ix + k*iy + k*k*iz.
using VoxelId = std::int32_t;

struct VoxelIndex {
  int ix = 0;
  int iy = 0;
  int iz = 0;

  friend bool operator==(const VoxelIndex&, const VoxelIndex&) = default;
};

// The k x k x k partition of the unit cube.
class VoxelGrid {
 public:
  explicit VoxelGrid(int k);

  int k() const noexcept { return k_; }
  int num_voxels() const noexcept { return k_ * k_ * k_; }

  VoxelId encode(VoxelIndex index) const;
  VoxelIndex decode(VoxelId id) const;

  // Cell index along one axis for a coordinate in [0,1]: half-open
  // intervals [i/k, (i+1)/k) with the top face clamped into cell k-1.
  int cell(double coord) const;

  VoxelId voxel_of(Point3 p) const;

  // Geometric center ((ix+0.5)/k, (iy+0.5)/k, (iz+0.5)/k).
  Point3 center(VoxelId id) const;

 private:
  int k_;
};

// Bijection on {0, ..., k^3 - 1}; mapping[s] is the destination of source
// voxel s.
class VoxelPermutation {
 public:
  explicit VoxelPermutation(std::vector<VoxelId> mapping);

  static VoxelPermutation identity(int num_voxels);

  std::size_t size() const noexcept { return mapping_.size(); }
  VoxelId operator()(VoxelId source) const { return mapping_[static_cast<std::size_t>(source)]; }
  std::span<const VoxelId> mapping() const noexcept { return mapping_; }

  VoxelPermutation inverse() const;

  friend bool operator==(const VoxelPermutation&, const VoxelPermutation&) = default;

 private:
  std::vector<VoxelId> mapping_;
};

}  // namespace jigsaw3d
