#include "jigsaw3d/synth.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "jigsaw3d/errors.hpp"

namespace jigsaw3d {
namespace {

constexpr double kPi = std::numbers::pi;

struct Box {
  Point3 lo;
  Point3 hi;

  double area() const {
    const double dx = hi.x - lo.x, dy = hi.y - lo.y, dz = hi.z - lo.z;
    return 2.0 * (dx * dy + dy * dz + dx * dz);
  }
};

Point3 sample_box_surface(const Box& b, Rng& rng) {
  const double dx = b.hi.x - b.lo.x, dy = b.hi.y - b.lo.y, dz = b.hi.z - b.lo.z;
  const std::array<double, 3> face_area{dy * dz, dx * dz, dx * dy};  // normal x, y, z
  const double total = 2.0 * (face_area[0] + face_area[1] + face_area[2]);
  double u = rng.uniform() * total;
  int axis = 0;
  bool high = false;
  for (int f = 0; f < 6; ++f) {
    const double a = face_area[static_cast<std::size_t>(f / 2)];
    if (u < a || f == 5) {
      axis = f / 2;
      high = (f % 2) == 1;
      break;
    }
    u -= a;
  }
  Point3 p{b.lo.x + dx * rng.uniform(), b.lo.y + dy * rng.uniform(), b.lo.z + dz * rng.uniform()};
  p[axis] = high ? b.hi[axis] : b.lo[axis];
  return p;
}

// Surface of a union of boxes; part = index of the box.
ShapeSurface sample_boxes(const std::vector<Box>& boxes, std::size_t n, Rng& rng) {
  double total = 0.0;
  for (const auto& b : boxes) total += b.area();
  ShapeSurface s;
  s.points.reserve(n);
  s.parts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double u = rng.uniform() * total;
    std::size_t k = 0;
    while (k + 1 < boxes.size() && u >= boxes[k].area()) {
      u -= boxes[k].area();
      ++k;
    }
    s.points.push_back(sample_box_surface(boxes[k], rng));
    s.parts.push_back(static_cast<int>(k));
  }
  return s;
}

Point3 unit_gaussian_direction(Rng& rng) {
  for (;;) {
    const Point3 g{rng.gaussian(), rng.gaussian(), rng.gaussian()};
    const double len = norm(g);
    if (len > 1e-12) return (1.0 / len) * g;
  }
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("synth spec: '" + key + "' expects a number, got '" + value + "'");
  }
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size() || value.front() == '-') throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("synth spec: '" + key + "' expects a non-negative integer, got '" + value +
                      "'");
  }
}

std::string real_str(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

const char* family_name(ShapeFamily family) {
  switch (family) {
    case ShapeFamily::kSphere:
      return "sphere";
    case ShapeFamily::kCube:
      return "cube";
    case ShapeFamily::kCylinder:
      return "cylinder";
    case ShapeFamily::kTorus:
      return "torus";
    case ShapeFamily::kTable:
      return "table";
    case ShapeFamily::kChair:
      return "chair";
  }
  return "?";
}

ShapeFamily parse_family(const std::string& name) {
  for (auto f : {ShapeFamily::kSphere, ShapeFamily::kCube, ShapeFamily::kCylinder,
                 ShapeFamily::kTorus, ShapeFamily::kTable, ShapeFamily::kChair}) {
    if (name == family_name(f)) return f;
  }
  throw ConfigError("unknown shape family '" + name + "'");
}

std::vector<std::string> family_parts(ShapeFamily family) {
  switch (family) {
    case ShapeFamily::kCylinder:
      return {"side", "cap"};
    case ShapeFamily::kTable:
      return {"top", "leg"};
    case ShapeFamily::kChair:
      return {"seat", "back"};
    default:
      return {"surface"};
  }
}

ShapeSurface sample_family_surface(ShapeFamily family, std::size_t n, Rng& rng) {
  ShapeSurface s;
  s.points.reserve(n);
  s.parts.reserve(n);
  switch (family) {
    case ShapeFamily::kSphere:
      for (std::size_t i = 0; i < n; ++i) {
        s.points.push_back(0.5 * unit_gaussian_direction(rng));
        s.parts.push_back(0);
      }
      return s;
    case ShapeFamily::kCube:
      return sample_boxes({Box{{-0.5, -0.5, -0.5}, {0.5, 0.5, 0.5}}}, n, rng);
    case ShapeFamily::kCylinder: {
      const double r = 0.35, h = 1.0;
      const double side = 2.0 * kPi * r * h;
      const double caps = 2.0 * kPi * r * r;
      for (std::size_t i = 0; i < n; ++i) {
        const double theta = 2.0 * kPi * rng.uniform();
        if (rng.uniform() * (side + caps) < side) {
          s.points.push_back({r * std::cos(theta), r * std::sin(theta), h * (rng.uniform() - 0.5)});
          s.parts.push_back(0);
        } else {
          const double rho = r * std::sqrt(rng.uniform());
          const double z = rng.uniform() < 0.5 ? -0.5 * h : 0.5 * h;
          s.points.push_back({rho * std::cos(theta), rho * std::sin(theta), z});
          s.parts.push_back(1);
        }
      }
      return s;
    }
    case ShapeFamily::kTorus: {
      const double big = 0.35, small = 0.15;
      while (s.points.size() < n) {
        const double theta = 2.0 * kPi * rng.uniform();
        const double phi = 2.0 * kPi * rng.uniform();
        // Accept proportionally to the local area element.
        if (rng.uniform() * (big + small) > big + small * std::cos(phi)) continue;
        const double ring = big + small * std::cos(phi);
        s.points.push_back({ring * std::cos(theta), ring * std::sin(theta), small * std::sin(phi)});
        s.parts.push_back(0);
      }
      return s;
    }
    case ShapeFamily::kTable:
      return sample_boxes({Box{{-0.5, -0.35, 0.42}, {0.5, 0.35, 0.5}},
                           Box{{-0.06, -0.06, -0.5}, {0.06, 0.06, 0.42}}},
                          n, rng);
    case ShapeFamily::kChair:
      return sample_boxes({Box{{-0.3, -0.3, -0.5}, {0.3, 0.3, -0.4}},
                           Box{{-0.3, 0.22, -0.4}, {0.3, 0.3, 0.5}}},
                          n, rng);
  }
  return s;
}

SynthSpec SynthSpec::parse(const std::string& text) {
  SynthSpec spec;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("synth spec: expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "families") {
      spec.families.clear();
      std::stringstream fs(value);
      std::string name;
      while (std::getline(fs, name, ',')) spec.families.push_back(parse_family(name));
    } else if (key == "per_class") {
      spec.per_class_count = parse_uint(key, value);
    } else if (key == "points") {
      spec.points_per_cloud = parse_uint(key, value);
    } else if (key == "seed") {
      spec.seed = parse_uint(key, value);
    } else if (key == "train_frac") {
      spec.train_fraction = parse_real(key, value);
    } else if (key == "scale") {
      spec.scale_jitter = parse_real(key, value);
    } else if (key == "aspect") {
      spec.aspect_jitter = parse_real(key, value);
    } else if (key == "yaw") {
      spec.yaw_range = parse_real(key, value);
    } else if (key == "noise") {
      spec.noise_sigma = parse_real(key, value);
    } else {
      throw ConfigError("synth spec: unknown key '" + key + "'");
    }
  }
  if (spec.families.size() < 2) throw ConfigError("synth spec: at least two families required");
  if (spec.per_class_count < 1 || spec.points_per_cloud < 1) {
    throw ConfigError("synth spec: per_class and points must be >= 1");
  }
  if (!(spec.train_fraction >= 0.0 && spec.train_fraction <= 1.0)) {
    throw ConfigError("synth spec: train_frac must be in [0, 1]");
  }
  if (!(spec.scale_jitter >= 0.0 && spec.scale_jitter < 1.0) ||
      !(spec.aspect_jitter >= 0.0 && spec.aspect_jitter < 1.0) || !(spec.noise_sigma >= 0.0)) {
    throw ConfigError("synth spec: scale/aspect in [0, 1), noise >= 0");
  }
  return spec;
}

std::string SynthSpec::to_string() const {
  std::string s = "families=";
  for (std::size_t i = 0; i < families.size(); ++i) {
    if (i) s += ",";
    s += family_name(families[i]);
  }
  s += ";per_class=" + std::to_string(per_class_count);
  s += ";points=" + std::to_string(points_per_cloud);
  s += ";seed=" + std::to_string(seed);
  s += ";train_frac=" + real_str(train_fraction);
  s += ";scale=" + real_str(scale_jitter);
  s += ";aspect=" + real_str(aspect_jitter);
  s += ";yaw=" + real_str(yaw_range);
  s += ";noise=" + real_str(noise_sigma);
  return s;
}

Dataset synthesize_dataset(const SynthSpec& spec) {
  Dataset ds;
  ds.name = "synth:" + spec.to_string();
  ds.class_labels.emplace();
  ds.point_labels.emplace();
  ds.num_classes = static_cast<int>(spec.families.size());

  int part_offset = 0;
  std::vector<int> offsets;
  for (std::size_t c = 0; c < spec.families.size(); ++c) {
    ds.class_names.push_back(family_name(spec.families[c]));
    const auto parts = family_parts(spec.families[c]);
    offsets.push_back(part_offset);
    auto& list = ds.parts_per_class[static_cast<int>(c)];
    for (std::size_t p = 0; p < parts.size(); ++p) list.push_back(part_offset + static_cast<int>(p));
    part_offset += static_cast<int>(parts.size());
  }
  ds.num_part_classes = part_offset;

  const auto train_per_class = static_cast<std::size_t>(
      std::floor(spec.train_fraction * static_cast<double>(spec.per_class_count) + 1e-9));
  auto& train = ds.splits["train"];
  auto& test = ds.splits["test"];

  for (std::size_t c = 0; c < spec.families.size(); ++c) {
    for (std::size_t i = 0; i < spec.per_class_count; ++i) {
      Rng rng = Rng::stream(spec.seed, c * spec.per_class_count + i);
      ShapeSurface surf = sample_family_surface(spec.families[c], spec.points_per_cloud, rng);
      const double scale = rng.uniform(1.0 - spec.scale_jitter, 1.0 + spec.scale_jitter);
      const Point3 aspect{rng.uniform(1.0 - spec.aspect_jitter, 1.0 + spec.aspect_jitter),
                          rng.uniform(1.0 - spec.aspect_jitter, 1.0 + spec.aspect_jitter),
                          rng.uniform(1.0 - spec.aspect_jitter, 1.0 + spec.aspect_jitter)};
      const Rotation3 yaw = rotation_z(rng.uniform(-spec.yaw_range, spec.yaw_range));
      for (auto& p : surf.points) {
        Point3 q{scale * aspect.x * p.x, scale * aspect.y * p.y, scale * aspect.z * p.z};
        q = yaw.apply(q);
        if (spec.noise_sigma > 0.0) {
          q = q + Point3{spec.noise_sigma * rng.gaussian(), spec.noise_sigma * rng.gaussian(),
                         spec.noise_sigma * rng.gaussian()};
        }
        p = q;
      }
      for (int& part : surf.parts) part += offsets[c];
      (i < train_per_class ? train : test).push_back(ds.clouds.size());
      ds.clouds.emplace_back(std::move(surf.points));
      ds.class_labels->push_back(static_cast<int>(c));
      ds.point_labels->push_back(std::move(surf.parts));
    }
  }
  ds.validate();
  return ds;
}

}  // namespace jigsaw3d
