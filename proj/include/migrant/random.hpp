#pragma once

#include <cstdint>
#include <random>

namespace migrant {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of the substream used by trajectory `index` of a run seeded with
/// `master_seed`:
///
///   derive_seed(m, i) = splitmix64(m ^ splitmix64(i))
///
/// Distinct indices give unrelated seeds, so replications can be simulated in
/// any order or on any worker and still reproduce exactly.
constexpr std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(master_seed ^ splitmix64(index));
}

/// One random stream. Not shareable between concurrent callers.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_{seed}, engine_{seed} {}

  static RandomStream substream(std::uint64_t master_seed, std::uint64_t index) {
    return RandomStream{derive_seed(master_seed, index)};
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::uint64_t seed() const { return seed_; }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace migrant
