#ifndef SPARSE_RECOVERY_RNG_HPP
#define SPARSE_RECOVERY_RNG_HPP

#include <cstdint>
#include <random>

namespace sparse_recovery {

struct RngSeed {
  std::uint64_t value = 1;

  friend bool operator==(const RngSeed&, const RngSeed&) = default;
};

/// Seed for sub-stream `stream` of `seed` (splitmix64 mixing), so a
/// scenario can hand independent seeds to its masks, noise and trials.
RngSeed derive_seed(RngSeed seed, std::uint64_t stream) noexcept;

/// Deterministic random source: std::mt19937_64 seeded with the seed value.
///
/// Draws are built from raw 64-bit outputs only (no std distributions),
/// so a seed produces the same stream on every standard library:
///   uniform_index  rejection sampling on the top of the 64-bit range
///   uniform01      53 high bits scaled to [0, 1)
///   normal         Box-Muller on two uniform01 draws, one value per call
class Rng {
 public:
  explicit Rng(RngSeed seed) : engine_(seed.value) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound), bound > 0.
  std::uint64_t uniform_index(std::uint64_t bound);

  double uniform01();

  /// Standard normal deviate.
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace sparse_recovery

#endif  // SPARSE_RECOVERY_RNG_HPP
