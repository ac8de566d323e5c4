#pragma once

#include <array>
#include <cstdint>

namespace jigsaw3d {

// Deterministic generator used everywhere in the library: xoshiro256**
// seeded through splitmix64. The draw sequence for a given seed is fixed
// and independent of platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Independent stream for (seed, stream_index). Used to give every task
  // (epoch, sample, stage) its own generator so results do not depend on
  // evaluation order.
  static Rng stream(std::uint64_t seed, std::uint64_t stream_index);
  static std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream_index);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform();

  // Uniform in [lo, hi).
  double uniform(double lo, double hi);

  // Unbiased integer in [0, m). m == 0 throws ContractViolation.
  std::uint64_t uniform_int(std::uint64_t m);

  // Standard normal via Box-Muller (one value per call, no caching).
  double gaussian();

  // A child generator seeded from this generator's next draw.
  Rng split();

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_;
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace jigsaw3d
