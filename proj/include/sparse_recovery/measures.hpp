#ifndef SPARSE_RECOVERY_MEASURES_HPP
#define SPARSE_RECOVERY_MEASURES_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "sparse_recovery/transform.hpp"

namespace sparse_recovery {

enum class MeasureKind { LpForm, Ratio42, NormZero };

std::string_view to_string(MeasureKind kind);
MeasureKind parse_measure_kind(std::string_view text);  // "lp", "ratio42", "norm0"

/// Which concentration measure to evaluate. `p` is read by LpForm only
/// (the exponent applied to magnitudes is 1/p); `zero_threshold` by
/// NormZero only.
struct MeasureSpec {
  MeasureKind kind = MeasureKind::LpForm;
  double p = 1.0;
  double zero_threshold = 1e-9;

  void validate() const;
};

namespace detail {

enum class PowerPath { Quarter, Half, ThreeQuarter, Square, General };

PowerPath classify_exponent(double exponent) noexcept;

// |z|^exponent given |z|^2.
inline double power_of_norm(double sq, PowerPath path, double exponent) noexcept {
  switch (path) {
    case PowerPath::Quarter: return std::sqrt(std::sqrt(sq));
    case PowerPath::Half: return std::sqrt(sq);
    case PowerPath::ThreeQuarter: {
      const double r = std::sqrt(sq);
      return r * std::sqrt(r);
    }
    case PowerPath::Square: return sq;
    case PowerPath::General: break;
  }
  return sq == 0.0 ? 0.0 : std::pow(sq, 0.5 * exponent);
}

}  // namespace detail

/// |z|^exponent. Exponents 0.5, 1, 1.5 and 2 are evaluated with square
/// roots only; every measure path goes through the same kernel so results
/// agree bitwise.
double magnitude_power(Complex z, double exponent) noexcept;

/// Repeated evaluation of (1/N) sum_k |X(k)|^(1/p) with p fixed.
class LpMeasure {
 public:
  explicit LpMeasure(double p);

  double p() const noexcept { return p_; }
  double exponent() const noexcept { return exponent_; }

  double term(Complex z) const noexcept {
    return detail::power_of_norm(z.real() * z.real() + z.imag() * z.imag(), path_, exponent_);
  }

  double operator()(std::span<const Complex> X) const noexcept;

 private:
  double p_;
  double exponent_;
  detail::PowerPath path_;
};

/// (1/N) sum_k |X(k)|^(1/p), summed in ascending k.
double measure_lp(std::span<const Complex> X, double p);
double measure_lp(const Spectrum& X, double p);

/// sum |X|^4 / (sum |X|^2)^2. Throws std::domain_error on a zero spectrum.
double measure_ratio_4_2(std::span<const Complex> X);
double measure_ratio_4_2(const Spectrum& X);

/// Number of entries with magnitude strictly above `zero_threshold`.
std::size_t effective_duration(std::span<const Complex> X, double zero_threshold);
std::size_t effective_duration(std::span<const double> x, double zero_threshold);

/// Raw value of the measure named by `spec`.
double evaluate_measure(const MeasureSpec& spec, std::span<const Complex> X);

/// Quantity that is smaller for sparser spectra, used as the minimization
/// objective: the lp measure, the duration count, or the reciprocal of the
/// 4/2 ratio (the effective number of coefficients).
double concentration_cost(const MeasureSpec& spec, std::span<const Complex> X);

}  // namespace sparse_recovery

#endif  // SPARSE_RECOVERY_MEASURES_HPP
