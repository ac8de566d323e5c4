#include "jigsaw3d/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <sstream>

#include "jigsaw3d/dataset_io.hpp"
#include "jigsaw3d/errors.hpp"

namespace jigsaw3d {
namespace {

constexpr const char* kMagic = "jigsaw3d-checkpoint";

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0x00000000FFFFFFFFULL) << 32) | ((v & 0xFFFFFFFF00000000ULL) >> 32);
    v = ((v & 0x0000FFFF0000FFFFULL) << 16) | ((v & 0xFFFF0000FFFF0000ULL) >> 16);
    v = ((v & 0x00FF00FF00FF00FFULL) << 8) | ((v & 0xFF00FF00FF00FF00ULL) >> 8);
  }
  return v;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (int x : v) s += " " + std::to_string(x);
  return s;
}

[[noreturn]] void corrupt(const std::string& what) {
  throw CheckpointError(CheckpointError::Kind::kCorrupt, "corrupt checkpoint: " + what);
}

// Reads "key v1 v2 ..." and checks the key.
std::vector<std::string> expect_line(std::istringstream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) corrupt("header ends before '" + key + "'");
  std::istringstream ls(line);
  std::string k;
  ls >> k;
  if (k != key) corrupt("expected '" + key + "', found '" + k + "'");
  std::vector<std::string> values;
  for (std::string v; ls >> v;) values.push_back(v);
  return values;
}

long long to_ll(const std::string& s) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) corrupt("bad integer '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    corrupt("bad integer '" + s + "'");
  }
}

int single_int(const std::vector<std::string>& values, const std::string& key) {
  if (values.size() != 1) corrupt("'" + key + "' expects one value");
  return static_cast<int>(to_ll(values[0]));
}

std::vector<int> int_list(const std::vector<std::string>& values) {
  std::vector<int> out;
  for (const auto& v : values) out.push_back(static_cast<int>(to_ll(v)));
  return out;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  const NetworkConfig& cfg = ckpt.params.config;
  std::ostringstream os;
  os << kMagic << "\n";
  os << "format_version " << ckpt.format_version << "\n";
  os << "encoder_widths" << join(cfg.encoder_widths) << "\n";
  os << "embed_dim " << cfg.embed_dim << "\n";
  os << "head_widths" << join(cfg.head_widths) << "\n";
  os << "num_point_classes " << cfg.num_point_classes << "\n";
  os << "condition_dim " << cfg.condition_dim << "\n";
  os << "step " << ckpt.step << "\n";
  os << "seed " << ckpt.seed << "\n";
  const auto tensors = ckpt.params.tensors();
  os << "tensors " << tensors.size() << "\n";
  for (const auto& t : tensors) {
    os << "tensor " << t.name << " " << t.tensor->rows() << " " << t.tensor->cols() << "\n";
  }
  os << "end_header\n";
  std::string out = os.str();
  for (const auto& t : tensors) {
    for (double v : t.tensor->data()) {
      const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
      char buf[8];
      std::memcpy(buf, &bits, 8);
      out.append(buf, 8);
    }
  }
  return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  const std::string marker = "end_header\n";
  const auto header_end = bytes.find(marker);
  if (bytes.rfind(kMagic, 0) != 0) corrupt("missing magic line");
  if (header_end == std::string::npos) corrupt("header not terminated");
  std::istringstream in(bytes.substr(0, header_end));

  std::string magic;
  std::getline(in, magic);
  Checkpoint ckpt;
  ckpt.format_version = single_int(expect_line(in, "format_version"), "format_version");
  if (ckpt.format_version != kCheckpointFormatVersion) {
    throw CheckpointError(CheckpointError::Kind::kVersion,
                          "checkpoint format_version " + std::to_string(ckpt.format_version) +
                              " is not supported (this build reads version " +
                              std::to_string(kCheckpointFormatVersion) + ")");
  }
  NetworkConfig cfg;
  cfg.encoder_widths = int_list(expect_line(in, "encoder_widths"));
  cfg.embed_dim = single_int(expect_line(in, "embed_dim"), "embed_dim");
  cfg.head_widths = int_list(expect_line(in, "head_widths"));
  cfg.num_point_classes = single_int(expect_line(in, "num_point_classes"), "num_point_classes");
  cfg.condition_dim = single_int(expect_line(in, "condition_dim"), "condition_dim");
  {
    const auto v = expect_line(in, "step");
    if (v.size() != 1) corrupt("'step' expects one value");
    ckpt.step = to_ll(v[0]);
  }
  {
    const auto v = expect_line(in, "seed");
    if (v.size() != 1) corrupt("'seed' expects one value");
    try {
      ckpt.seed = std::stoull(v[0]);
    } catch (const std::logic_error&) {
      corrupt("bad seed");
    }
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    corrupt(e.what());
  }
  const int count = single_int(expect_line(in, "tensors"), "tensors");

  // Rebuild the structure from the config, then check it against the header.
  Rng dummy(0);
  Parameters params = init_parameters(cfg, dummy).zeros_like();
  struct Entry {
    std::string name;
    std::size_t rows, cols;
  };
  std::vector<Entry> entries;
  for (int i = 0; i < count; ++i) {
    const auto v = expect_line(in, "tensor");
    if (v.size() != 3) corrupt("tensor line needs name rows cols");
    entries.push_back({v[0], static_cast<std::size_t>(to_ll(v[1])), static_cast<std::size_t>(to_ll(v[2]))});
  }
  const bool has_classifier = !entries.empty() && entries.back().name == "classifier.bias";
  if (has_classifier) {
    if (entries.size() < 2) corrupt("classifier tensors incomplete");
    const Entry& w = entries[entries.size() - 2];
    params.classifier = Layer{Tensor2(w.rows, w.cols), Tensor2(1, w.cols)};
  }
  auto tensors = params.tensors();
  if (tensors.size() != entries.size()) corrupt("tensor count does not match the configuration");
  std::size_t payload = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].name != tensors[i].name || entries[i].rows != tensors[i].tensor->rows() ||
        entries[i].cols != tensors[i].tensor->cols()) {
      corrupt("tensor '" + entries[i].name + "' does not match the configuration");
    }
    payload += tensors[i].tensor->size() * 8;
  }
  const std::size_t data_begin = header_end + marker.size();
  if (bytes.size() - data_begin != payload) {
    corrupt("payload is " + std::to_string(bytes.size() - data_begin) + " bytes, expected " +
            std::to_string(payload));
  }
  std::size_t offset = data_begin;
  for (auto& t : tensors) {
    for (double& v : t.tensor->data()) {
      std::uint64_t bits = 0;
      std::memcpy(&bits, bytes.data() + offset, 8);
      v = std::bit_cast<double>(to_little_endian(bits));
      offset += 8;
    }
  }
  params.config = cfg;
  ckpt.params = std::move(params);
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  try {
    write_file_atomic(path, serialize_checkpoint(ckpt));
  } catch (const std::exception& e) {
    throw CheckpointError(CheckpointError::Kind::kIo, e.what());
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::string bytes;
  try {
    bytes = read_file(path);
  } catch (const std::exception& e) {
    throw CheckpointError(CheckpointError::Kind::kIo, e.what());
  }
  return deserialize_checkpoint(bytes);
}

}  // namespace jigsaw3d
