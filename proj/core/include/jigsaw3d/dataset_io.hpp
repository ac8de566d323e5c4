#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "jigsaw3d/dataset.hpp"

namespace jigsaw3d {

struct LoadOptions {
  // Surface samples drawn from each OFF mesh.
  std::size_t off_samples = 1024;
  std::uint64_t seed = 0;
};

// ModelNet-style directory: <root>/<class>/{train,test}/*.{xyz,off}. Files
// placed directly under <root>/<class>/ go to split "train". An .xyz file
// may carry a sibling .seg file with per-point labels.
Dataset load_dataset_dir(const std::filesystem::path& root, const LoadOptions& opts);

// "synth:<spec>" or a directory path.
Dataset load_dataset(const std::string& source, const LoadOptions& opts);

// Reads a whole file; throws std::runtime_error on failure.
std::string read_file(const std::filesystem::path& path);

// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace jigsaw3d
