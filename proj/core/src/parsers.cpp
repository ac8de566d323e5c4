#include "jigsaw3d/parsers.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "jigsaw3d/errors.hpp"

namespace jigsaw3d {
namespace {

struct Line {
  std::string_view text;
  std::size_t number;  // 1-based
};

// Non-empty lines with '#' comments stripped.
std::vector<Line> content_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++number;
    std::string_view line = text.substr(pos, end - pos);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first != std::string_view::npos) {
      const auto last = line.find_last_not_of(" \t\r");
      lines.push_back({line.substr(first, last - first + 1), number});
    }
    if (end == text.size()) break;
    pos = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    const auto start = line.find_first_not_of(" \t\r", pos);
    if (start == std::string_view::npos) break;
    auto end = line.find_first_of(" \t\r", start);
    if (end == std::string_view::npos) end = line.size();
    out.push_back(line.substr(start, end - start));
    pos = end;
  }
  return out;
}

bool to_double(std::string_view token, double& out) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

bool to_size(std::string_view token, std::size_t& out) {
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size();
}

Point3 parse_point(const Line& line, std::string_view what) {
  const auto fields = split_ws(line.text);
  Point3 p;
  if (fields.size() < 3 || !to_double(fields[0], p.x) || !to_double(fields[1], p.y) ||
      !to_double(fields[2], p.z)) {
    throw ParseError(std::string(what) + ": expected at least 3 numeric fields", line.number);
  }
  return p;
}

double triangle_area(Point3 a, Point3 b, Point3 c) {
  const Point3 u = b - a;
  const Point3 v = c - a;
  const Point3 cross{u.y * v.z - u.z * v.y, u.z * v.x - u.x * v.z, u.x * v.y - u.y * v.x};
  return 0.5 * norm(cross);
}

}  // namespace

PointCloud parse_xyz(std::string_view text) {
  std::vector<Point3> points;
  for (const Line& line : content_lines(text)) points.push_back(parse_point(line, "xyz"));
  if (points.empty()) throw ParseError("xyz: no points", 0);
  return PointCloud(std::move(points));
}

std::vector<int> parse_labels(std::string_view text) {
  std::vector<int> labels;
  for (const Line& line : content_lines(text)) {
    const auto fields = split_ws(line.text);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), v);
    if (ec != std::errc() || ptr != fields[0].data() + fields[0].size()) {
      throw ParseError("labels: expected an integer", line.number);
    }
    labels.push_back(v);
  }
  return labels;
}

Mesh parse_off_mesh(std::string_view text) {
  const std::vector<Line> lines = content_lines(text);
  if (lines.empty()) throw ParseError("off: empty input", 0);
  std::size_t cursor = 0;

  std::vector<std::string_view> header = split_ws(lines[0].text);
  if (header.empty() || header[0].substr(0, 3) != "OFF") {
    throw ParseError("off: missing OFF header", lines[0].number);
  }
  std::vector<std::string_view> counts;
  if (header[0].size() > 3) counts.push_back(header[0].substr(3));
  counts.insert(counts.end(), header.begin() + 1, header.end());
  ++cursor;
  std::size_t counts_line = lines[0].number;
  if (counts.empty()) {
    if (cursor >= lines.size()) throw ParseError("off: missing counts line", 0);
    counts = split_ws(lines[cursor].text);
    counts_line = lines[cursor].number;
    ++cursor;
  }
  std::size_t nv = 0;
  std::size_t nf = 0;
  if (counts.size() < 2 || !to_size(counts[0], nv) || !to_size(counts[1], nf)) {
    throw ParseError("off: counts line must be 'V F E'", counts_line);
  }

  Mesh mesh;
  mesh.vertices.reserve(nv);
  for (std::size_t i = 0; i < nv; ++i, ++cursor) {
    if (cursor >= lines.size()) {
      throw ParseError("off: expected " + std::to_string(nv) + " vertices, found " +
                           std::to_string(i),
                       0);
    }
    mesh.vertices.push_back(parse_point(lines[cursor], "off vertex"));
  }
  mesh.faces.reserve(nf);
  for (std::size_t f = 0; f < nf; ++f, ++cursor) {
    if (cursor >= lines.size()) {
      throw ParseError("off: expected " + std::to_string(nf) + " faces, found " +
                           std::to_string(f),
                       0);
    }
    const auto fields = split_ws(lines[cursor].text);
    std::size_t k = 0;
    if (fields.empty() || !to_size(fields[0], k) || k < 3 || fields.size() < k + 1) {
      throw ParseError("off: malformed face", lines[cursor].number);
    }
    std::vector<std::size_t> face(k);
    for (std::size_t j = 0; j < k; ++j) {
      if (!to_size(fields[j + 1], face[j]) || face[j] >= nv) {
        throw ParseError("off: face references a missing vertex", lines[cursor].number);
      }
    }
    mesh.faces.push_back(std::move(face));
  }
  return mesh;
}

PointCloud sample_surface(const Mesh& mesh, std::size_t num_samples, Rng& rng) {
  require(num_samples >= 1, "sample_surface: num_samples must be >= 1");
  struct Tri {
    std::size_t a, b, c;
  };
  std::vector<Tri> tris;
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& face : mesh.faces) {
    for (std::size_t j = 1; j + 1 < face.size(); ++j) {
      const Tri t{face[0], face[j], face[j + 1]};
      total += triangle_area(mesh.vertices[t.a], mesh.vertices[t.b], mesh.vertices[t.c]);
      tris.push_back(t);
      cumulative.push_back(total);
    }
  }
  if (!(total > 0.0)) throw ParseError("off: mesh has no surface area to sample", 0);

  std::vector<Point3> points;
  points.reserve(num_samples);
  for (std::size_t s = 0; s < num_samples; ++s) {
    const double u = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    const Tri& t = tris[static_cast<std::size_t>(it - cumulative.begin())];
    const double r1 = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    const Point3 a = mesh.vertices[t.a];
    const Point3 b = mesh.vertices[t.b];
    const Point3 c = mesh.vertices[t.c];
    points.push_back((1.0 - r1) * a + (r1 * (1.0 - r2)) * b + (r1 * r2) * c);
  }
  return PointCloud(std::move(points));
}

PointCloud parse_off(std::string_view text, const OffOptions& opts, Rng* rng) {
  const Mesh mesh = parse_off_mesh(text);
  if (opts.mode == OffMode::kVertices) {
    if (mesh.vertices.empty()) throw ParseError("off: no vertices", 0);
    return PointCloud(mesh.vertices);
  }
  require(rng != nullptr, "parse_off: surface sampling needs an Rng");
  return sample_surface(mesh, opts.num_samples, *rng);
}

}  // namespace jigsaw3d
