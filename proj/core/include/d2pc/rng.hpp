#pragma once

#include <cstdint>
#include <random>

namespace d2pc {

// One SplitMix64 step. Used to scramble seeds so that nearby user seeds
// (base, base+1, ...) produce unrelated streams.
[[nodiscard]] std::uint64_t splitmix64(std::uint64_t& state);

// Deterministic random stream with explicit substream derivation.
//
// Streams derived from the same (seed, tag) pair are identical across
// platforms and across runs; streams with different tags are statistically
// independent. Doubles are produced by a fixed 53-bit mapping rather than
// std::uniform_real_distribution, whose output is implementation defined.
class Rng {
public:
  explicit Rng(std::uint64_t seed);

  // Independent stream addressed by tag, unaffected by draws from *this.
  [[nodiscard]] Rng stream(std::uint64_t tag) const;
  [[nodiscard]] Rng stream(std::uint64_t tag_a, std::uint64_t tag_b) const;

  [[nodiscard]] std::uint64_t next_u64();

  // Uniform on [lo, hi) with 53 random bits.
  [[nodiscard]] double uniform(double lo, double hi);

private:
  std::uint64_t root_;
  std::mt19937_64 engine_;
};

} // namespace d2pc
