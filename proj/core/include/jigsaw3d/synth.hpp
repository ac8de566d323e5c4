#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "jigsaw3d/dataset.hpp"
#include "jigsaw3d/geometry.hpp"
#include "jigsaw3d/rng.hpp"

namespace jigsaw3d {

// Procedural shape families used as a small stand-in for ShapeNet/ModelNet.
enum class ShapeFamily { kSphere, kCube, kCylinder, kTorus, kTable, kChair };

const char* family_name(ShapeFamily family);
ShapeFamily parse_family(const std::string& name);

// Local part names per family ("surface", or e.g. "top"/"leg" for tables).
std::vector<std::string> family_parts(ShapeFamily family);

struct ShapeSurface {
  std::vector<Point3> points;
  std::vector<int> parts;  // local part index per point
};

// Unperturbed surface sample of a family at unit size, centered at the
// origin with z up. Sphere radius is 0.5.
ShapeSurface sample_family_surface(ShapeFamily family, std::size_t n, Rng& rng);

struct SynthSpec {
  std::vector<ShapeFamily> families{ShapeFamily::kSphere, ShapeFamily::kCube,
                                   ShapeFamily::kCylinder, ShapeFamily::kTorus};
  std::size_t per_class_count = 10;
  std::size_t points_per_cloud = 256;
  std::uint64_t seed = 0;
  // First floor(train_fraction * per_class_count) instances of every class
  // form split "train", the rest split "test".
  double train_fraction = 0.5;
  // Instance perturbation: uniform scale in [1-s, 1+s], per-axis aspect in
  // [1-a, 1+a], yaw in [-y, y] radians, then Gaussian noise.
  double scale_jitter = 0.5;
  double aspect_jitter = 0.2;
  double yaw_range = 0.5235987755982988;  // 30 degrees
  double noise_sigma = 0.005;

  // "families=sphere,cube;per_class=10;points=256;seed=1;train_frac=0.5;..."
  static SynthSpec parse(const std::string& text);
  std::string to_string() const;
};

// Labeled dataset with class labels, global part labels and train/test
// splits. Content is a pure function of the SynthSpec.
Dataset synthesize_dataset(const SynthSpec& spec);

}  // namespace jigsaw3d
