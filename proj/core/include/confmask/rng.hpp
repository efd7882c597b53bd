#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace confmask {

/// Name recorded in reports so consumers can tell which generator produced a
/// permutation or a synthetic dataset.
inline constexpr const char* kPrngName = "splitmix64";

/// SplitMix64: a tiny 64-bit generator with a fully specified update rule, so
/// streams are identical across platforms, standard libraries, and runs.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0,1), 53 bits of resolution.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double next_in(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t next_below(std::uint64_t bound) { return next() % bound; }

 private:
  std::uint64_t state_;
};

/// Stream key for item `index` of a dataset seeded with `seed`; feeding the
/// result to SplitMix64 yields independent per-item streams.
inline std::uint64_t mix_key(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 g(seed ^ (0x6a09e667f3bcc909ULL + index * 0x3c6ef372fe94f82bULL));
  g.next();
  return g.next();
}

/// Deterministic Fisher-Yates permutation of {0, ..., n-1}.
std::vector<std::size_t> random_permutation(std::size_t n, std::uint64_t seed);

}  // namespace confmask
