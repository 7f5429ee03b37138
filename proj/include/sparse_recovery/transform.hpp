#ifndef SPARSE_RECOVERY_TRANSFORM_HPP
#define SPARSE_RECOVERY_TRANSFORM_HPP

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace sparse_recovery {

using Complex = std::complex<double>;

/// Real-valued sample sequence of fixed length N >= 2 with finite samples.
class Signal {
 public:
  explicit Signal(std::vector<double> samples);

  static Signal zeros(std::size_t length);

  std::size_t size() const noexcept { return samples_.size(); }
  double operator[](std::size_t n) const { return samples_[n]; }
  std::span<const double> samples() const noexcept { return samples_; }
  const std::vector<double>& values() const noexcept { return samples_; }

  friend bool operator==(const Signal&, const Signal&) = default;

 private:
  std::vector<double> samples_;
};

/// Transform-domain coefficients; same length as the source signal.
class Spectrum {
 public:
  explicit Spectrum(std::vector<Complex> coefficients);

  std::size_t size() const noexcept { return coefficients_.size(); }
  const Complex& operator[](std::size_t k) const { return coefficients_[k]; }
  std::span<const Complex> coefficients() const noexcept { return coefficients_; }

  friend bool operator==(const Spectrum&, const Spectrum&) = default;

 private:
  std::vector<Complex> coefficients_;
};

/// Linear sparsifying transform of real sequences of a fixed length.
///
/// Measures and recovery only ever see a transform through this interface.
/// Because the transform is linear, perturbing sample n by d moves the
/// result by d times impulse_response(n); recovery uses that to evaluate
/// probes without a full transform.
class Transform {
 public:
  virtual ~Transform() = default;

  virtual std::size_t size() const noexcept = 0;

  /// Transform of x; x.size() must equal size().
  virtual std::vector<Complex> apply(std::span<const double> x) const = 0;

  /// Column n of the transform matrix. The base version transforms a unit
  /// impulse.
  virtual void impulse_response(std::size_t n, std::span<Complex> out) const;

  Spectrum forward(const Signal& x) const;
};

/// Unnormalized DFT, X(k) = sum_n x(n) exp(-i 2 pi n k / N).
///
/// Radix-2 FFT when N is a power of two, direct summation otherwise. The
/// output for real input is forced exactly conjugate symmetric.
class DftTransform final : public Transform {
 public:
  explicit DftTransform(std::size_t length);

  std::size_t size() const noexcept override { return length_; }
  std::vector<Complex> apply(std::span<const double> x) const override;
  void impulse_response(std::size_t n, std::span<Complex> out) const override;

  /// O(N^2) summation over the twiddle table, independent of the FFT path.
  std::vector<Complex> apply_direct(std::span<const double> x) const;

  bool uses_fft() const noexcept { return radix2_; }

  /// exp(-i 2 pi m / N) for m in [0, N).
  std::span<const Complex> twiddles() const noexcept { return twiddles_; }

 private:
  std::vector<Complex> apply_fft(std::span<const double> x) const;

  std::size_t length_;
  bool radix2_;
  std::vector<Complex> twiddles_;
  std::vector<std::size_t> bit_reverse_;
};

/// Shared DFT plan for a given length. Plans are immutable and cached.
std::shared_ptr<const DftTransform> dft_plan(std::size_t length);

Spectrum dft_forward(const Signal& x);

/// Inverse of dft_forward: x(n) = (1/N) sum_k X(k) exp(i 2 pi n k / N).
/// Returns the full complex result.
std::vector<Complex> dft_inverse_complex(const Spectrum& spectrum);

/// Real part of dft_inverse_complex.
Signal dft_inverse(const Spectrum& spectrum);

}  // namespace sparse_recovery

#endif  // SPARSE_RECOVERY_TRANSFORM_HPP
