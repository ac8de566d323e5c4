#include "jigsaw3d/dataset_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "jigsaw3d/errors.hpp"
#include "jigsaw3d/parsers.hpp"
#include "jigsaw3d/rng.hpp"
#include "jigsaw3d/synth.hpp"

namespace fs = std::filesystem;

namespace jigsaw3d {
namespace {

std::vector<fs::path> sorted_entries(const fs::path& dir, bool want_dirs) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (want_dirs ? e.is_directory() : e.is_regular_file()) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool is_cloud_file(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".xyz" || ext == ".off";
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

Dataset load_dataset_dir(const fs::path& root, const LoadOptions& opts) {
  if (!fs::is_directory(root)) throw ConfigError("dataset directory '" + root.string() + "' not found");
  Dataset ds;
  ds.name = root.filename().string();
  ds.class_labels.emplace();
  std::vector<std::vector<int>> point_labels;
  bool all_labeled = true;

  const auto class_dirs = sorted_entries(root, true);
  for (std::size_t c = 0; c < class_dirs.size(); ++c) {
    ds.class_names.push_back(class_dirs[c].filename().string());
    std::vector<std::pair<std::string, fs::path>> files;
    for (const char* split : {"train", "test"}) {
      const fs::path sub = class_dirs[c] / split;
      if (!fs::is_directory(sub)) continue;
      for (const auto& f : sorted_entries(sub, false)) {
        if (is_cloud_file(f)) files.emplace_back(split, f);
      }
    }
    for (const auto& f : sorted_entries(class_dirs[c], false)) {
      if (is_cloud_file(f)) files.emplace_back("train", f);
    }
    for (const auto& [split, file] : files) {
      const std::string text = read_file(file);
      PointCloud cloud = [&] {
        try {
          if (file.extension() == ".xyz") return parse_xyz(text);
          Rng rng = Rng::stream(opts.seed, ds.clouds.size());
          return parse_off(text, {OffMode::kSurfaceSample, opts.off_samples}, &rng);
        } catch (const ParseError& e) {
          throw ParseError(file.string() + ": " + e.what(), 0);
        }
      }();
      fs::path seg = file;
      seg.replace_extension(".seg");
      if (file.extension() == ".xyz" && fs::exists(seg)) {
        std::vector<int> labels = parse_labels(read_file(seg));
        if (labels.size() != cloud.size()) {
          throw ParseError(seg.string() + ": label count differs from point count", 0);
        }
        point_labels.push_back(std::move(labels));
      } else {
        all_labeled = false;
        point_labels.emplace_back();
      }
      ds.splits[split].push_back(ds.clouds.size());
      ds.clouds.push_back(std::move(cloud));
      ds.class_labels->push_back(static_cast<int>(c));
    }
  }
  if (ds.clouds.empty()) throw ConfigError("dataset directory '" + root.string() + "' has no clouds");
  ds.num_classes = static_cast<int>(class_dirs.size());

  if (all_labeled) {
    int max_part = -1;
    std::map<int, std::set<int>> parts;
    for (std::size_t i = 0; i < point_labels.size(); ++i) {
      for (int p : point_labels[i]) {
        if (p < 0) throw ParseError("negative part label in dataset", 0);
        max_part = std::max(max_part, p);
        parts[(*ds.class_labels)[i]].insert(p);
      }
    }
    ds.point_labels = std::move(point_labels);
    ds.num_part_classes = max_part + 1;
    for (const auto& [c, set] : parts) ds.parts_per_class[c] = {set.begin(), set.end()};
  }
  ds.validate();
  return ds;
}

Dataset load_dataset(const std::string& source, const LoadOptions& opts) {
  constexpr std::string_view kSynth = "synth:";
  if (source.rfind(kSynth, 0) == 0) {
    return synthesize_dataset(SynthSpec::parse(source.substr(kSynth.size())));
  }
  return load_dataset_dir(source, opts);
}

}  // namespace jigsaw3d
