#include "jigsaw3d/voxel.hpp"

#include <cmath>
#include <numeric>

#include "jigsaw3d/errors.hpp"

namespace jigsaw3d {

VoxelGrid::VoxelGrid(int k) : k_(k) {
  require(k >= 1 && k <= 1000, "VoxelGrid: k must be in [1, 1000]");
}

VoxelId VoxelGrid::encode(VoxelIndex index) const {
  require(index.ix >= 0 && index.ix < k_ && index.iy >= 0 && index.iy < k_ && index.iz >= 0 &&
              index.iz < k_,
          "VoxelGrid::encode: index out of range");
  return index.ix + k_ * index.iy + k_ * k_ * index.iz;
}

VoxelIndex VoxelGrid::decode(VoxelId id) const {
  require(id >= 0 && id < num_voxels(), "VoxelGrid::decode: id out of range");
  return {id % k_, (id / k_) % k_, id / (k_ * k_)};
}

int VoxelGrid::cell(double coord) const {
  const int i = static_cast<int>(std::floor(coord * k_));
  if (i < 0) return 0;
  if (i > k_ - 1) return k_ - 1;
  return i;
}

VoxelId VoxelGrid::voxel_of(Point3 p) const {
  return encode({cell(p.x), cell(p.y), cell(p.z)});
}

Point3 VoxelGrid::center(VoxelId id) const {
  const VoxelIndex v = decode(id);
  const double inv = 1.0 / k_;
  return {(v.ix + 0.5) * inv, (v.iy + 0.5) * inv, (v.iz + 0.5) * inv};
}

VoxelPermutation::VoxelPermutation(std::vector<VoxelId> mapping) : mapping_(std::move(mapping)) {
  require(!mapping_.empty(), "VoxelPermutation: empty mapping");
  std::vector<char> seen(mapping_.size(), 0);
  for (VoxelId d : mapping_) {
    require(d >= 0 && static_cast<std::size_t>(d) < mapping_.size() && !seen[d],
            "VoxelPermutation: mapping is not a bijection");
    seen[d] = 1;
  }
}

VoxelPermutation VoxelPermutation::identity(int num_voxels) {
  require(num_voxels >= 1, "VoxelPermutation::identity: size must be >= 1");
  std::vector<VoxelId> m(static_cast<std::size_t>(num_voxels));
  std::iota(m.begin(), m.end(), 0);
  return VoxelPermutation(std::move(m));
}

VoxelPermutation VoxelPermutation::inverse() const {
  std::vector<VoxelId> inv(mapping_.size());
  for (std::size_t s = 0; s < mapping_.size(); ++s) {
    inv[static_cast<std::size_t>(mapping_[s])] = static_cast<VoxelId>(s);
  }
  return VoxelPermutation(std::move(inv));
}

}  // namespace jigsaw3d
