#include "d2pc/rng.hpp"

namespace d2pc {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2));
  std::uint64_t first = splitmix64(s);
  return first ^ splitmix64(s);
}

} // namespace

Rng::Rng(std::uint64_t seed) : root_(seed) {
  std::uint64_t s = seed;
  const std::uint64_t scrambled = splitmix64(s);
  engine_.seed(scrambled);
}

Rng Rng::stream(std::uint64_t tag) const { return Rng(mix(root_, tag)); }

Rng Rng::stream(std::uint64_t tag_a, std::uint64_t tag_b) const {
  return Rng(mix(mix(root_, tag_a), tag_b));
}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform(double lo, double hi) {
  // Top 53 bits -> [0, 1) on the dyadic grid; identical on every platform.
  const double unit = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

} // namespace d2pc
