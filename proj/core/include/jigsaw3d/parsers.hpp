#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "jigsaw3d/geometry.hpp"
#include "jigsaw3d/rng.hpp"

namespace jigsaw3d {

// Whitespace-separated "x y z [ignored...]" per line; blank lines and lines
// starting with '#' are skipped. Throws ParseError naming the line.
PointCloud parse_xyz(std::string_view text);

// One integer label per non-empty line (ShapeNet-part style .seg files).
std::vector<int> parse_labels(std::string_view text);

enum class OffMode { kVertices, kSurfaceSample };

struct OffOptions {
  OffMode mode = OffMode::kVertices;
  std::size_t num_samples = 1024;
};

struct Mesh {
  std::vector<Point3> vertices;
  std::vector<std::vector<std::size_t>> faces;
};

// Accepts the ModelNet quirk of counts glued to the header ("OFF8 6 0").
Mesh parse_off_mesh(std::string_view text);

// Vertices, or `num_samples` surface points: triangle (fan-triangulated
// faces) chosen with probability proportional to area, then a uniform
// barycentric draw. `rng` is required for sampling.
PointCloud parse_off(std::string_view text, const OffOptions& opts, Rng* rng = nullptr);

PointCloud sample_surface(const Mesh& mesh, std::size_t num_samples, Rng& rng);

}  // namespace jigsaw3d
