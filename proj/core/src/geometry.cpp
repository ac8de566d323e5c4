#include "jigsaw3d/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "jigsaw3d/errors.hpp"
#include "jigsaw3d/rng.hpp"

namespace jigsaw3d {

PointCloud::PointCloud(std::vector<Point3> points) : points_(std::move(points)) {
  require(!points_.empty(), "PointCloud: at least one point required");
  for (const auto& p : points_) {
    require(p.is_finite(), "PointCloud: non-finite coordinate");
  }
}

BoundingBox bounding_box(const PointCloud& cloud) {
  BoundingBox box{cloud[0], cloud[0]};
  for (const auto& p : cloud) {
    for (int a = 0; a < 3; ++a) {
      box.min[a] = std::min(box.min[a], p[a]);
      box.max[a] = std::max(box.max[a], p[a]);
    }
  }
  return box;
}

Rotation3 random_rotation(Rng& rng) {
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  const double u3 = rng.uniform();
  const double two_pi = 2.0 * std::numbers::pi;
  const double a = std::sqrt(1.0 - u1);
  const double b = std::sqrt(u1);
  const double w = a * std::sin(two_pi * u2);
  const double x = a * std::cos(two_pi * u2);
  const double y = b * std::sin(two_pi * u3);
  const double z = b * std::cos(two_pi * u3);

  Rotation3 r;
  r.m[0][0] = 1 - 2 * (y * y + z * z);
  r.m[0][1] = 2 * (x * y - z * w);
  r.m[0][2] = 2 * (x * z + y * w);
  r.m[1][0] = 2 * (x * y + z * w);
  r.m[1][1] = 1 - 2 * (x * x + z * z);
  r.m[1][2] = 2 * (y * z - x * w);
  r.m[2][0] = 2 * (x * z - y * w);
  r.m[2][1] = 2 * (y * z + x * w);
  r.m[2][2] = 1 - 2 * (x * x + y * y);
  return r;
}

Rotation3 rotation_z(double angle) {
  Rotation3 r;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  r.m[0][0] = c;
  r.m[0][1] = -s;
  r.m[1][0] = s;
  r.m[1][1] = c;
  return r;
}

}  // namespace jigsaw3d
