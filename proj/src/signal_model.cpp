#include "sparse_recovery/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sparse_recovery {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": length mismatch (" + std::to_string(a) +
                                " vs " + std::to_string(b) + ")");
  }
}

double energy(std::span<const double> x) {
  double sum = 0.0;
  for (double v : x) sum += v * v;
  return sum;
}

}  // namespace

Signal synth_multitone(std::span<const ToneComponent> components, std::size_t length) {
  if (length < 2) throw std::invalid_argument("signal length must be at least 2");
  std::vector<double> x(length, 0.0);
  const double n_total = static_cast<double>(length);
  for (std::size_t n = 0; n < length; ++n) {
    double value = 0.0;
    for (const auto& c : components) {
      const double arg = c.angular_coefficient * std::numbers::pi * static_cast<double>(n) / n_total;
      value += c.amplitude * (c.phase == PhaseKind::Sin ? std::sin(arg) : std::cos(arg));
    }
    x[n] = value;
  }
  return Signal(std::move(x));
}

std::vector<ToneComponent> single_tone_components() { return {{2.5, 20.0, PhaseKind::Sin}}; }

std::vector<ToneComponent> two_tone_components() {
  return {{3.0, 10.0, PhaseKind::Sin}, {2.0, 30.0, PhaseKind::Cos}};
}

std::vector<ToneComponent> three_tone_components() {
  return {{3.0, 20.0, PhaseKind::Sin}, {2.0, 60.0, PhaseKind::Cos}, {0.5, 110.0, PhaseKind::Sin}};
}

std::vector<ToneComponent> off_grid_tone_components() {
  return {{3.0, 11.2, PhaseKind::Sin}, {5.0, 50.6, PhaseKind::Sin}, {3.0, 160.8, PhaseKind::Cos}};
}

AvailabilityMask::AvailabilityMask(std::size_t length, std::vector<std::size_t> missing)
    : missing_(std::move(missing)), is_missing_(length, 0) {
  if (length < 2) throw std::invalid_argument("mask length must be at least 2");
  std::sort(missing_.begin(), missing_.end());
  for (std::size_t i = 0; i < missing_.size(); ++i) {
    if (missing_[i] >= length) {
      throw std::invalid_argument("missing index " + std::to_string(missing_[i]) +
                                  " out of range for length " + std::to_string(length));
    }
    if (i > 0 && missing_[i] == missing_[i - 1]) {
      throw std::invalid_argument("duplicate missing index " + std::to_string(missing_[i]));
    }
    is_missing_[missing_[i]] = 1;
  }
  if (missing_.size() >= length) {
    throw std::invalid_argument("mask must leave at least one available sample");
  }
}

std::vector<std::size_t> AvailabilityMask::available() const {
  std::vector<std::size_t> out;
  out.reserve(available_count());
  for (std::size_t n = 0; n < size(); ++n) {
    if (!is_missing_[n]) out.push_back(n);
  }
  return out;
}

AvailabilityMask make_mask_random(std::size_t length, std::size_t count, RngSeed seed) {
  if (count >= length) {
    throw std::invalid_argument("mask must leave at least one available sample");
  }
  std::vector<std::size_t> pool(length);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.uniform_index(length - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return AvailabilityMask(length, std::move(pool));
}

AvailabilityMask make_mask_blocks(std::size_t length, std::span<const Block> blocks) {
  std::vector<unsigned char> taken(length, 0);
  std::vector<std::size_t> missing;
  for (const auto& b : blocks) {
    if (b.length == 0 || b.start >= length || b.length > length - b.start) {
      throw std::invalid_argument("block [" + std::to_string(b.start) + ", +" +
                                  std::to_string(b.length) + ") does not fit in length " +
                                  std::to_string(length));
    }
    for (std::size_t n = b.start; n < b.start + b.length; ++n) {
      if (taken[n]) throw std::invalid_argument("blocks overlap at index " + std::to_string(n));
      taken[n] = 1;
      missing.push_back(n);
    }
  }
  return AvailabilityMask(length, std::move(missing));
}

AvailabilityMask make_mask_blocks_random(std::size_t length,
                                         std::span<const std::size_t> block_lengths,
                                         RngSeed seed, std::size_t max_retries) {
  std::size_t total = 0;
  for (auto len : block_lengths) {
    if (len == 0 || len > length) throw std::invalid_argument("block length out of range");
    total += len;
  }
  if (total >= length) {
    throw std::invalid_argument("blocks cannot be placed: total length " + std::to_string(total) +
                                " leaves no available sample in length " + std::to_string(length));
  }

  Rng rng(seed);
  std::vector<Block> blocks(block_lengths.size());
  for (std::size_t attempt = 0; attempt < max_retries; ++attempt) {
    for (std::size_t i = 0; i < block_lengths.size(); ++i) {
      blocks[i] = {static_cast<std::size_t>(rng.uniform_index(length - block_lengths[i] + 1)),
                   block_lengths[i]};
    }
    auto sorted = blocks;
    std::sort(sorted.begin(), sorted.end(),
              [](const Block& a, const Block& b) { return a.start < b.start; });
    bool overlap = false;
    for (std::size_t i = 1; i < sorted.size() && !overlap; ++i) {
      overlap = sorted[i].start < sorted[i - 1].start + sorted[i - 1].length;
    }
    if (!overlap) return make_mask_blocks(length, blocks);
  }
  throw std::runtime_error("blocks cannot be placed without overlap after " +
                           std::to_string(max_retries) + " attempts");
}

Signal zero_fill(const Signal& x, const AvailabilityMask& mask) {
  require_same_length(x.size(), mask.size(), "zero_fill");
  auto y = x.values();
  for (auto n : mask.missing()) y[n] = 0.0;
  return Signal(std::move(y));
}

Signal add_gaussian_noise(const Signal& x, double snr_db, RngSeed seed) {
  if (snr_db == kNoiseDisabled) return x;
  if (std::isnan(snr_db) || std::isinf(snr_db)) {
    throw std::invalid_argument("snr_db must be finite (or +infinity to disable noise)");
  }
  const double signal_energy = energy(x.samples());
  if (signal_energy == 0.0) throw std::invalid_argument("SNR undefined for a zero signal");

  Rng rng(seed);
  std::vector<double> w(x.size());
  for (auto& v : w) v = rng.normal();
  const double noise_energy = energy(w);
  const double target = signal_energy / std::pow(10.0, snr_db / 10.0);
  const double scale = std::sqrt(target / noise_energy);

  auto y = x.values();
  for (std::size_t n = 0; n < y.size(); ++n) y[n] += scale * w[n];
  return Signal(std::move(y));
}

double mae(const Signal& x, const Signal& y) {
  require_same_length(x.size(), y.size(), "mae");
  double sum = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) sum += std::abs(x[n] - y[n]);
  return sum / static_cast<double>(x.size());
}

double snr_db(const Signal& reference, const Signal& estimate) {
  require_same_length(reference.size(), estimate.size(), "snr_db");
  const double ref_energy = energy(reference.samples());
  if (ref_energy == 0.0) throw std::invalid_argument("SNR undefined for a zero reference");
  double err = 0.0;
  for (std::size_t n = 0; n < reference.size(); ++n) {
    const double d = reference[n] - estimate[n];
    err += d * d;
  }
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(ref_energy / err);
}

}  // namespace sparse_recovery
