#ifndef SPARSE_RECOVERY_SIGNAL_MODEL_HPP
#define SPARSE_RECOVERY_SIGNAL_MODEL_HPP

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "sparse_recovery/rng.hpp"
#include "sparse_recovery/transform.hpp"

namespace sparse_recovery {

enum class PhaseKind { Sin, Cos };

/// amplitude * sin(angular_coefficient * pi * n / N), or cos.
struct ToneComponent {
  double amplitude = 0.0;
  double angular_coefficient = 0.0;
  PhaseKind phase = PhaseKind::Sin;
};

Signal synth_multitone(std::span<const ToneComponent> components, std::size_t length);

// Reference test signals, N samples each.
std::vector<ToneComponent> single_tone_components();     // 2.5 sin(20 pi n/N)
std::vector<ToneComponent> two_tone_components();        // 3 sin(10 pi n/N) + 2 cos(30 pi n/N)
std::vector<ToneComponent> three_tone_components();      // 3 sin(20..) + 2 cos(60..) + 0.5 sin(110..)
std::vector<ToneComponent> off_grid_tone_components();   // 3 sin(11.2..) + 5 sin(50.6..) + 3 cos(160.8..)

/// Partition of [0, N) into available and missing sample positions.
class AvailabilityMask {
 public:
  /// Missing indices may come in any order; duplicates and out-of-range
  /// indices are rejected, as is a mask without any available sample.
  AvailabilityMask(std::size_t length, std::vector<std::size_t> missing);

  static AvailabilityMask none(std::size_t length) { return AvailabilityMask(length, {}); }

  std::size_t size() const noexcept { return is_missing_.size(); }
  std::size_t missing_count() const noexcept { return missing_.size(); }
  std::size_t available_count() const noexcept { return size() - missing_.size(); }

  /// Strictly increasing.
  std::span<const std::size_t> missing() const noexcept { return missing_; }
  std::vector<std::size_t> available() const;

  bool is_missing(std::size_t n) const { return is_missing_.at(n) != 0; }

  friend bool operator==(const AvailabilityMask& a, const AvailabilityMask& b) {
    return a.missing_ == b.missing_ && a.is_missing_.size() == b.is_missing_.size();
  }

 private:
  std::vector<std::size_t> missing_;
  std::vector<unsigned char> is_missing_;
};

/// `count` distinct positions drawn uniformly (partial Fisher-Yates).
AvailabilityMask make_mask_random(std::size_t length, std::size_t count, RngSeed seed);

struct Block {
  std::size_t start = 0;
  std::size_t length = 0;
};

/// Missing set is the union of explicitly placed blocks; overlapping or
/// out-of-range blocks are rejected.
AvailabilityMask make_mask_blocks(std::size_t length, std::span<const Block> blocks);

inline constexpr std::size_t kBlockPlacementRetries = 10000;

/// Blocks of the given lengths at uniformly drawn non-overlapping starts.
/// Placement is redrawn as a whole on overlap, up to `max_retries` times.
AvailabilityMask make_mask_blocks_random(std::size_t length,
                                         std::span<const std::size_t> block_lengths,
                                         RngSeed seed,
                                         std::size_t max_retries = kBlockPlacementRetries);

/// Available samples kept, missing samples set to zero.
Signal zero_fill(const Signal& x, const AvailabilityMask& mask);

/// Pass this as snr_db to disable noise.
inline constexpr double kNoiseDisabled = std::numeric_limits<double>::infinity();

/// x + w, with w white Gaussian scaled so the realized SNR equals snr_db.
Signal add_gaussian_noise(const Signal& x, double snr_db, RngSeed seed);

/// (1/N) sum |x(n) - y(n)|.
double mae(const Signal& x, const Signal& y);

/// 10 log10(sum ref^2 / sum (ref - est)^2); +infinity when identical.
double snr_db(const Signal& reference, const Signal& estimate);

}  // namespace sparse_recovery

#endif  // SPARSE_RECOVERY_SIGNAL_MODEL_HPP
