#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace jigsaw3d {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }
  double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }

  bool is_finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }

  friend Point3 operator+(Point3 a, Point3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Point3 operator-(Point3 a, Point3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Point3 operator*(double s, Point3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend bool operator==(const Point3&, const Point3&) = default;
};

inline double dot(Point3 a, Point3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Point3 a) { return std::sqrt(dot(a, a)); }
inline double distance(Point3 a, Point3 b) { return norm(a - b); }

// Ordered sequence of at least one finite point. Immutable once built; the
// constructor rejects empty input and NaN/Inf coordinates.
class PointCloud {
 public:
  explicit PointCloud(std::vector<Point3> points);

  std::size_t size() const noexcept { return points_.size(); }
  std::span<const Point3> points() const noexcept { return points_; }
  const Point3& operator[](std::size_t i) const { return points_[i]; }

  auto begin() const noexcept { return points_.begin(); }
  auto end() const noexcept { return points_.end(); }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;

 private:
  std::vector<Point3> points_;
};

struct BoundingBox {
  Point3 min;
  Point3 max;
};

BoundingBox bounding_box(const PointCloud& cloud);

// 3x3 rotation matrix, row-major.
struct Rotation3 {
  double m[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

  Point3 apply(Point3 p) const {
    return {m[0][0] * p.x + m[0][1] * p.y + m[0][2] * p.z,
            m[1][0] * p.x + m[1][1] * p.y + m[1][2] * p.z,
            m[2][0] * p.x + m[2][1] * p.y + m[2][2] * p.z};
  }
};

class Rng;

// Uniformly distributed rotation (Shoemake's unit-quaternion construction).
Rotation3 random_rotation(Rng& rng);

// Rotation by `angle` radians about the z axis.
Rotation3 rotation_z(double angle);

}  // namespace jigsaw3d
