#include "jigsaw3d/rng.hpp"

#include <cmath>
#include <numbers>

#include "jigsaw3d/errors.hpp"

namespace jigsaw3d {
namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed) {
  std::uint64_t sm = seed;
  for (auto& s : state_) s = splitmix64(sm);
}

std::uint64_t Rng::stream_seed(std::uint64_t seed, std::uint64_t stream_index) {
  std::uint64_t a = seed;
  std::uint64_t mixed = splitmix64(a);
  std::uint64_t b = mixed ^ (stream_index * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL);
  return splitmix64(b);
}

Rng Rng::stream(std::uint64_t seed, std::uint64_t stream_index) {
  return Rng(stream_seed(seed, stream_index));
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t Rng::uniform_int(std::uint64_t m) {
  require(m >= 1, "Rng::uniform_int: m must be >= 1");
  // Lemire's multiply-shift with rejection of the biased low range.
  unsigned __int128 product = static_cast<unsigned __int128>(next_u64()) * m;
  auto low = static_cast<std::uint64_t>(product);
  if (low < m) {
    const std::uint64_t threshold = (0 - m) % m;
    while (low < threshold) {
      product = static_cast<unsigned __int128>(next_u64()) * m;
      low = static_cast<std::uint64_t>(product);
    }
  }
  return static_cast<std::uint64_t>(product >> 64);
}

double Rng::gaussian() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Rng Rng::split() { return Rng(next_u64()); }

}  // namespace jigsaw3d
