#include "sparse_recovery/gradient_recovery.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>
#include <thread>

#include "sparse_recovery/io.hpp"
#include "sparse_recovery/measures.hpp"

namespace sparse_recovery {

namespace {

void require_positive(double v, const char* name) {
  if (!std::isfinite(v) || v <= 0.0) {
    throw std::invalid_argument(std::string(name) + " must be finite and positive");
  }
}

std::shared_ptr<const Transform> resolve_transform(const RecoveryOptions& options,
                                                   std::size_t length) {
  if (!options.transform) return dft_plan(length);
  if (options.transform->size() != length) {
    throw std::invalid_argument("transform length does not match the signal");
  }
  return options.transform;
}

// Evaluates the two-sided measure differences for every missing sample.
class ProbeEngine {
 public:
  ProbeEngine(std::shared_ptr<const Transform> transform, const AvailabilityMask& mask,
              ProbeMode mode, unsigned workers)
      : transform_(std::move(transform)),
        missing_(mask.missing().begin(), mask.missing().end()),
        mode_(mode),
        workers_(std::max(1u, workers)) {
    if (mode_ == ProbeMode::Incremental) {
      columns_.resize(missing_.size(), std::vector<Complex>(transform_->size()));
      for (std::size_t i = 0; i < missing_.size(); ++i) {
        transform_->impulse_response(missing_[i], columns_[i]);
      }
    }
  }

  const Transform& transform() const { return *transform_; }

  // spectrum must be the transform of y.
  void gradient(std::span<const double> y, std::span<const Complex> spectrum,
                const LpMeasure& measure, double delta, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    const std::size_t count = missing_.size();
    auto run = [&](std::size_t lo, std::size_t hi) {
      std::vector<double> probe;
      if (mode_ == ProbeMode::Full) probe.assign(y.begin(), y.end());
      for (std::size_t i = lo; i < hi; ++i) {
        out[missing_[i]] = mode_ == ProbeMode::Incremental
                               ? incremental_difference(i, spectrum, measure, delta)
                               : full_difference(i, probe, measure, delta);
      }
    };
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(workers_, count));
    if (workers <= 1) {
      run(0, count);
      return;
    }
    std::vector<std::thread> threads;
    const std::size_t chunk = (count + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t lo = std::min(count, w * chunk);
      threads.emplace_back(run, lo, std::min(count, lo + chunk));
    }
    for (auto& t : threads) t.join();
  }

 private:
  double incremental_difference(std::size_t i, std::span<const Complex> spectrum,
                                const LpMeasure& measure, double delta) const {
    const auto& column = columns_[i];
    double plus = 0.0;
    double minus = 0.0;
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
      const Complex shift = delta * column[k];
      plus += measure.term(spectrum[k] + shift);
      minus += measure.term(spectrum[k] - shift);
    }
    const double n = static_cast<double>(spectrum.size());
    return (plus / n - minus / n) / (2.0 * delta);
  }

  double full_difference(std::size_t i, std::vector<double>& probe, const LpMeasure& measure,
                         double delta) const {
    const std::size_t n = missing_[i];
    const double original = probe[n];
    probe[n] = original + delta;
    const double plus = measure(transform_->apply(probe));
    probe[n] = original - delta;
    const double minus = measure(transform_->apply(probe));
    probe[n] = original;
    return (plus - minus) / (2.0 * delta);
  }

  std::shared_ptr<const Transform> transform_;
  std::vector<std::size_t> missing_;
  ProbeMode mode_;
  unsigned workers_;
  std::vector<std::vector<Complex>> columns_;
};

// Iterate state shared by the fixed, adaptive and scheduled drivers.
class Iteration {
 public:
  Iteration(const Signal& observed, const AvailabilityMask& mask, const RecoveryOptions& options)
      : options_(options),
        engine_(resolve_transform(options, observed.size()), mask, options.probe_mode,
                options.workers),
        y_(zero_fill(observed, mask).values()),
        gradient_(y_.size(), 0.0) {
    if (options.truth && options.truth->size() != observed.size()) {
      throw std::invalid_argument("truth signal length does not match the observation");
    }
    spectrum_ = engine_.transform().apply(y_);
  }

  double measure(const LpMeasure& lp) const { return lp(spectrum_); }

  double current_mae() const {
    if (!options_.truth) return std::numeric_limits<double>::quiet_NaN();
    double sum = 0.0;
    for (std::size_t n = 0; n < y_.size(); ++n) sum += std::abs((*options_.truth)[n] - y_[n]);
    return sum / static_cast<double>(y_.size());
  }

  // One estimate + correction; returns the record for iteration k.
  IterationRecord advance(std::size_t k, const LpMeasure& lp, double delta, double mu) {
    engine_.gradient(y_, spectrum_, lp, delta, gradient_);
    for (std::size_t n = 0; n < y_.size(); ++n) y_[n] -= mu * gradient_[n];
    for (double v : y_) {
      if (!std::isfinite(v)) {
        throw DivergenceError("reconstruction diverged at iteration " + std::to_string(k) +
                              ": non-finite sample");
      }
    }
    spectrum_ = engine_.transform().apply(y_);
    const double m = lp(spectrum_);
    if (!std::isfinite(m)) {
      throw DivergenceError("reconstruction diverged at iteration " + std::to_string(k) +
                            ": non-finite measure");
    }
    IterationRecord record{k, m, delta, mu, lp.p(), current_mae()};
    if (options_.on_iteration) options_.on_iteration(record, y_);
    return record;
  }

  Signal result() const { return Signal(y_); }

 private:
  const RecoveryOptions& options_;
  ProbeEngine engine_;
  std::vector<double> y_;
  std::vector<double> gradient_;
  std::vector<Complex> spectrum_;
};

}  // namespace

void GradientParams::validate() const {
  require_positive(delta, "delta");
  require_positive(mu, "mu");
  require_positive(p, "p");
  if (!std::isfinite(reduction_threshold) || reduction_threshold < 0.0 || reduction_threshold > 1.0) {
    throw std::invalid_argument("reduction threshold P must lie in [0, 1]");
  }
  if (!std::isfinite(reduction_factor) || reduction_factor <= 1.0) {
    throw std::invalid_argument("reduction factor must be finite and greater than 1");
  }
  if (max_iterations == 0) throw std::invalid_argument("max_iterations must be positive");
  require_positive(target_delta, "target_delta");
  if (!(target_delta < delta)) throw std::invalid_argument("target_delta must be below delta");
}

void ScheduleEntry::validate() const {
  require_positive(p, "p");
  require_positive(delta, "delta");
  require_positive(mu, "mu");
  if (iterations == 0) throw std::invalid_argument("schedule entry needs at least one iteration");
}

bool ReconstructionTrace::has_event(std::size_t k) const {
  return std::binary_search(events.begin(), events.end(), k);
}

void write_trace_csv(std::ostream& out, const ReconstructionTrace& trace) {
  out << "k,measure,delta,mu,p,mae,event\n";
  for (const auto& r : trace.records) {
    out << r.k << ',' << format_number(r.measure) << ',' << format_number(r.delta) << ','
        << format_number(r.mu) << ',' << format_number(r.p) << ',' << format_number(r.mae) << ','
        << (trace.has_event(r.k) ? 1 : 0) << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const ReconstructionTrace& trace) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  write_trace_csv(out, trace);
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

std::vector<double> gradient_estimate(const Signal& y, const AvailabilityMask& mask, double p,
                                      double delta, const RecoveryOptions& options) {
  require_positive(delta, "delta");
  if (y.size() != mask.size()) throw std::invalid_argument("signal and mask lengths differ");
  const LpMeasure lp(p);
  const ProbeEngine engine(resolve_transform(options, y.size()), mask, options.probe_mode,
                           options.workers);
  const auto spectrum = engine.transform().apply(y.samples());
  std::vector<double> gradient(y.size(), 0.0);
  engine.gradient(y.samples(), spectrum, lp, delta, gradient);
  return gradient;
}

Signal gradient_step(const Signal& y, std::span<const double> gradient, double mu) {
  if (gradient.size() != y.size()) throw std::invalid_argument("gradient length differs from signal");
  auto out = y.values();
  for (std::size_t n = 0; n < out.size(); ++n) out[n] -= mu * gradient[n];
  return Signal(std::move(out));
}

RecoveryResult reconstruct_fixed(const Signal& observed, const AvailabilityMask& mask,
                                 const GradientParams& params, const RecoveryOptions& options) {
  params.validate();
  Iteration it(observed, mask, options);
  const LpMeasure lp(params.p);
  ReconstructionTrace trace;
  trace.initial_measure = it.measure(lp);
  trace.initial_mae = it.current_mae();
  trace.records.reserve(params.max_iterations);
  for (std::size_t k = 1; k <= params.max_iterations; ++k) {
    trace.records.push_back(it.advance(k, lp, params.delta, params.mu));
  }
  return {it.result(), std::move(trace)};
}

RecoveryResult reconstruct_adaptive(const Signal& observed, const AvailabilityMask& mask,
                                    const GradientParams& params, const RecoveryOptions& options) {
  params.validate();
  Iteration it(observed, mask, options);
  const LpMeasure lp(params.p);
  ReconstructionTrace trace;
  trace.initial_measure = it.measure(lp);
  trace.initial_mae = it.current_mae();

  double delta = params.delta;
  double mu = params.mu;
  double previous = trace.initial_measure;
  // Largest |measure drop| since the last reduction; the stall test is
  // skipped on the first iteration of every parameter regime.
  double largest_drop = 0.0;
  bool armed = false;
  for (std::size_t k = 1; k <= params.max_iterations; ++k) {
    const auto record = it.advance(k, lp, delta, mu);
    trace.records.push_back(record);
    const double drop = previous - record.measure;
    previous = record.measure;

    if (params.reduction_threshold > 0.0 && armed &&
        drop <= params.reduction_threshold * largest_drop) {
      delta /= params.reduction_factor;
      mu /= params.reduction_factor;
      trace.events.push_back(k);
      largest_drop = 0.0;
      armed = false;
      if (delta < params.target_delta) break;
    } else {
      largest_drop = std::max(largest_drop, std::abs(drop));
      armed = true;
    }
  }
  return {it.result(), std::move(trace)};
}

RecoveryResult reconstruct_scheduled(const Signal& observed, const AvailabilityMask& mask,
                                     std::span<const ScheduleEntry> schedule,
                                     const RecoveryOptions& options) {
  if (schedule.empty()) throw std::invalid_argument("schedule must not be empty");
  for (const auto& entry : schedule) entry.validate();
  Iteration it(observed, mask, options);
  ReconstructionTrace trace;
  trace.initial_measure = it.measure(LpMeasure(schedule.front().p));
  trace.initial_mae = it.current_mae();
  std::size_t k = 0;
  for (const auto& entry : schedule) {
    const LpMeasure lp(entry.p);
    for (std::size_t i = 0; i < entry.iterations; ++i) {
      trace.records.push_back(it.advance(++k, lp, entry.delta, entry.mu));
    }
  }
  return {it.result(), std::move(trace)};
}

}  // namespace sparse_recovery
