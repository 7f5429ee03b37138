#include "sparse_recovery/transform.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sparse_recovery {

namespace {

void require_length(std::size_t n, const char* what) {
  if (n < 2) {
    throw std::invalid_argument(std::string(what) + " length must be at least 2, got " +
                                std::to_string(n));
  }
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Forces X(N-k) = conj(X(k)) exactly, with X(0) and X(N/2) real.
void symmetrize(std::vector<Complex>& X) {
  const std::size_t n = X.size();
  X[0] = Complex(X[0].real(), 0.0);
  for (std::size_t k = 1; k < n - k; ++k) X[n - k] = std::conj(X[k]);
  if (n % 2 == 0) X[n / 2] = Complex(X[n / 2].real(), 0.0);
}

}  // namespace

Signal::Signal(std::vector<double> samples) : samples_(std::move(samples)) {
  require_length(samples_.size(), "signal");
  for (std::size_t n = 0; n < samples_.size(); ++n) {
    if (!std::isfinite(samples_[n])) {
      throw std::invalid_argument("signal sample " + std::to_string(n) + " is not finite");
    }
  }
}

Signal Signal::zeros(std::size_t length) { return Signal(std::vector<double>(length, 0.0)); }

Spectrum::Spectrum(std::vector<Complex> coefficients) : coefficients_(std::move(coefficients)) {
  require_length(coefficients_.size(), "spectrum");
  for (std::size_t k = 0; k < coefficients_.size(); ++k) {
    const auto& c = coefficients_[k];
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
      throw std::invalid_argument("spectrum coefficient " + std::to_string(k) + " is not finite");
    }
  }
}

void Transform::impulse_response(std::size_t n, std::span<Complex> out) const {
  std::vector<double> impulse(size(), 0.0);
  impulse.at(n) = 1.0;
  const auto column = apply(impulse);
  std::copy(column.begin(), column.end(), out.begin());
}

Spectrum Transform::forward(const Signal& x) const { return Spectrum(apply(x.samples())); }

DftTransform::DftTransform(std::size_t length)
    : length_(length), radix2_(is_power_of_two(length)), twiddles_(length) {
  require_length(length, "transform");
  const double base = -2.0 * std::numbers::pi / static_cast<double>(length);
  twiddles_[0] = Complex(1.0, 0.0);
  for (std::size_t m = 1; m < length - m; ++m) {
    const double angle = base * static_cast<double>(m);
    twiddles_[m] = Complex(std::cos(angle), std::sin(angle));
    twiddles_[length - m] = std::conj(twiddles_[m]);
  }
  if (length % 2 == 0) twiddles_[length / 2] = Complex(-1.0, 0.0);

  if (radix2_) {
    bit_reverse_.resize(length);
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < length) ++bits;
    for (std::size_t i = 0; i < length; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b) {
        if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
      }
      bit_reverse_[i] = r;
    }
  }
}

std::vector<Complex> DftTransform::apply(std::span<const double> x) const {
  if (x.size() != length_) {
    throw std::invalid_argument("transform expects length " + std::to_string(length_) +
                                ", got " + std::to_string(x.size()));
  }
  auto X = radix2_ ? apply_fft(x) : apply_direct(x);
  symmetrize(X);
  return X;
}

std::vector<Complex> DftTransform::apply_direct(std::span<const double> x) const {
  std::vector<Complex> X(length_);
  for (std::size_t k = 0; k < length_; ++k) {
    Complex acc(0.0, 0.0);
    std::size_t m = 0;  // (n * k) mod N
    for (std::size_t n = 0; n < length_; ++n) {
      acc += x[n] * twiddles_[m];
      m += k;
      if (m >= length_) m -= length_;
    }
    X[k] = acc;
  }
  return X;
}

std::vector<Complex> DftTransform::apply_fft(std::span<const double> x) const {
  std::vector<Complex> a(length_);
  for (std::size_t i = 0; i < length_; ++i) a[bit_reverse_[i]] = Complex(x[i], 0.0);

  for (std::size_t len = 2; len <= length_; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = length_ / len;
    for (std::size_t start = 0; start < length_; start += len) {
      for (std::size_t j = 0; j < half; ++j) {
        const Complex t = twiddles_[j * stride] * a[start + j + half];
        const Complex u = a[start + j];
        a[start + j] = u + t;
        a[start + j + half] = u - t;
      }
    }
  }
  return a;
}

void DftTransform::impulse_response(std::size_t n, std::span<Complex> out) const {
  if (n >= length_ || out.size() != length_) {
    throw std::invalid_argument("impulse_response: index or output size out of range");
  }
  std::size_t m = 0;
  for (std::size_t k = 0; k < length_; ++k) {
    out[k] = twiddles_[m];
    m += n;
    if (m >= length_) m -= length_;
  }
}

std::shared_ptr<const DftTransform> dft_plan(std::size_t length) {
  static std::mutex mutex;
  static std::map<std::size_t, std::shared_ptr<const DftTransform>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[length];
  if (!slot) slot = std::make_shared<const DftTransform>(length);
  return slot;
}

Spectrum dft_forward(const Signal& x) { return dft_plan(x.size())->forward(x); }

std::vector<Complex> dft_inverse_complex(const Spectrum& spectrum) {
  const std::size_t n = spectrum.size();
  const auto plan = dft_plan(n);
  const auto w = plan->twiddles();
  std::vector<Complex> x(n);
  for (std::size_t t = 0; t < n; ++t) {
    Complex acc(0.0, 0.0);
    std::size_t m = 0;
    for (std::size_t k = 0; k < n; ++k) {
      // exp(+i 2 pi t k / N) = conj(w[t k mod N])
      acc += spectrum[k] * std::conj(w[m]);
      m += t;
      if (m >= n) m -= n;
    }
    x[t] = acc / static_cast<double>(n);
  }
  return x;
}

Signal dft_inverse(const Spectrum& spectrum) {
  const auto x = dft_inverse_complex(spectrum);
  std::vector<double> real(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) real[n] = x[n].real();
  return Signal(std::move(real));
}

}  // namespace sparse_recovery
