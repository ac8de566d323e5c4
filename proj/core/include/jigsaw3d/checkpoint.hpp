#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "jigsaw3d/net.hpp"

namespace jigsaw3d {

inline constexpr int kCheckpointFormatVersion = 1;

// On disk: a plain-text header (magic, format_version, configuration echo,
// step count, seed, one "tensor <name> <rows> <cols>" line per tensor,
// "end_header"), followed by every tensor as little-endian IEEE-754 doubles
// in header order.
struct Checkpoint {
  int format_version = kCheckpointFormatVersion;
  Parameters params;
  std::int64_t step = 0;
  std::uint64_t seed = 0;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace jigsaw3d
