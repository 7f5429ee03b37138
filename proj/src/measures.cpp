#include "sparse_recovery/measures.hpp"

#include <cmath>
#include <stdexcept>

namespace sparse_recovery {

std::string_view to_string(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::LpForm: return "lp";
    case MeasureKind::Ratio42: return "ratio42";
    case MeasureKind::NormZero: return "norm0";
  }
  return "lp";
}

MeasureKind parse_measure_kind(std::string_view text) {
  if (text == "lp") return MeasureKind::LpForm;
  if (text == "ratio42") return MeasureKind::Ratio42;
  if (text == "norm0") return MeasureKind::NormZero;
  throw std::invalid_argument("unknown measure kind '" + std::string(text) +
                              "' (expected lp, ratio42 or norm0)");
}

void MeasureSpec::validate() const {
  if (!std::isfinite(p) || p <= 0.0) {
    throw std::invalid_argument("measure parameter p must be finite and positive");
  }
  if (!std::isfinite(zero_threshold) || zero_threshold < 0.0) {
    throw std::invalid_argument("zero threshold must be finite and nonnegative");
  }
}

namespace detail {

PowerPath classify_exponent(double exponent) noexcept {
  if (exponent == 0.5) return PowerPath::Quarter;
  if (exponent == 1.0) return PowerPath::Half;
  if (exponent == 1.5) return PowerPath::ThreeQuarter;
  if (exponent == 2.0) return PowerPath::Square;
  return PowerPath::General;
}

}  // namespace detail

LpMeasure::LpMeasure(double p) : p_(p), exponent_(1.0 / p), path_(detail::PowerPath::General) {
  if (!std::isfinite(p) || p <= 0.0) {
    throw std::invalid_argument("measure parameter p must be finite and positive");
  }
  path_ = detail::classify_exponent(exponent_);
}

double LpMeasure::operator()(std::span<const Complex> X) const noexcept {
  double sum = 0.0;
  for (const auto& z : X) sum += term(z);
  return sum / static_cast<double>(X.size());
}

double magnitude_power(Complex z, double exponent) noexcept {
  return detail::power_of_norm(z.real() * z.real() + z.imag() * z.imag(),
                               detail::classify_exponent(exponent), exponent);
}

double measure_lp(std::span<const Complex> X, double p) { return LpMeasure(p)(X); }

double measure_lp(const Spectrum& X, double p) { return measure_lp(X.coefficients(), p); }

double measure_ratio_4_2(std::span<const Complex> X) {
  double fourth = 0.0;
  double second = 0.0;
  for (const auto& z : X) {
    const double sq = std::norm(z);
    second += sq;
    fourth += sq * sq;
  }
  if (second == 0.0) throw std::domain_error("measure undefined for zero spectrum");
  return fourth / (second * second);
}

double measure_ratio_4_2(const Spectrum& X) { return measure_ratio_4_2(X.coefficients()); }

namespace {

void require_threshold(double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("zero threshold must be nonnegative");
}

}  // namespace

std::size_t effective_duration(std::span<const Complex> X, double zero_threshold) {
  require_threshold(zero_threshold);
  std::size_t count = 0;
  for (const auto& z : X) {
    if (std::abs(z) > zero_threshold) ++count;
  }
  return count;
}

std::size_t effective_duration(std::span<const double> x, double zero_threshold) {
  require_threshold(zero_threshold);
  std::size_t count = 0;
  for (double v : x) {
    if (std::abs(v) > zero_threshold) ++count;
  }
  return count;
}

double evaluate_measure(const MeasureSpec& spec, std::span<const Complex> X) {
  switch (spec.kind) {
    case MeasureKind::LpForm: return measure_lp(X, spec.p);
    case MeasureKind::Ratio42: return measure_ratio_4_2(X);
    case MeasureKind::NormZero:
      return static_cast<double>(effective_duration(X, spec.zero_threshold));
  }
  return 0.0;
}

double concentration_cost(const MeasureSpec& spec, std::span<const Complex> X) {
  if (spec.kind == MeasureKind::Ratio42) return 1.0 / measure_ratio_4_2(X);
  return evaluate_measure(spec, X);
}

}  // namespace sparse_recovery
