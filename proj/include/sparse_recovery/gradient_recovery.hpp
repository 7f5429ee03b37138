#ifndef SPARSE_RECOVERY_GRADIENT_RECOVERY_HPP
#define SPARSE_RECOVERY_GRADIENT_RECOVERY_HPP

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "sparse_recovery/signal_model.hpp"
#include "sparse_recovery/transform.hpp"

namespace sparse_recovery {

/// Raised when an iterate or its measure stops being finite.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameters of the measure-gradient iteration.
///
/// `delta` is the probe amplitude used for the two-sided measure difference,
/// `mu` the correction step. The adaptive variant divides both by
/// `reduction_factor` whenever the drop in the measure falls to
/// `reduction_threshold` times the largest drop seen since the last
/// reduction (or the measure rises). A threshold of 0 disables reduction.
struct GradientParams {
  double delta = 2.0;
  double mu = 3.0;
  double p = 1.0;
  double reduction_threshold = 0.01;
  double reduction_factor = 10.0;
  std::size_t max_iterations = 10000;
  double target_delta = 1e-13;

  void validate() const;
};

struct ScheduleEntry {
  double p = 1.0;
  double delta = 1.0;
  double mu = 1.0;
  std::size_t iterations = 1;

  void validate() const;
};

struct IterationRecord {
  std::size_t k = 0;
  double measure = 0.0;
  double delta = 0.0;
  double mu = 0.0;
  double p = 0.0;
  /// NaN when no truth signal was supplied.
  double mae = 0.0;
};

struct ReconstructionTrace {
  double initial_measure = 0.0;
  double initial_mae = 0.0;
  /// One per completed iteration, k = 1, 2, ...
  std::vector<IterationRecord> records;
  /// Iterations after which delta and mu were reduced, strictly increasing.
  std::vector<std::size_t> events;

  bool has_event(std::size_t k) const;
};

/// Columns k,measure,delta,mu,p,mae,event (event is 1 on reduction rows).
void write_trace_csv(std::ostream& out, const ReconstructionTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const ReconstructionTrace& trace);

enum class ProbeMode {
  /// Probe spectra from the current spectrum plus +-delta times the
  /// transform column of the probed sample.
  Incremental,
  /// Full transform of every probe signal.
  Full,
};

struct RecoveryOptions {
  ProbeMode probe_mode = ProbeMode::Incremental;
  /// Threads sharing the probes of one gradient estimate.
  unsigned workers = 1;
  /// Null means the DFT of the signal's length.
  std::shared_ptr<const Transform> transform;
  /// When set, every trace record carries the MAE against it.
  std::optional<Signal> truth;
  /// Called after each iteration with the iterate.
  std::function<void(const IterationRecord&, std::span<const double>)> on_iteration;
};

/// Measure-difference gradient: zero on available positions; at missing n,
/// (M_p[T[y + delta e_n]] - M_p[T[y - delta e_n]]) / (2 delta), all probes
/// taken around the same y.
std::vector<double> gradient_estimate(const Signal& y, const AvailabilityMask& mask, double p,
                                      double delta, const RecoveryOptions& options = {});

/// y - mu * G.
Signal gradient_step(const Signal& y, std::span<const double> gradient, double mu);

struct RecoveryResult {
  Signal signal;
  ReconstructionTrace trace;
};

/// Zero-fills the missing samples of `observed` and runs exactly
/// params.max_iterations constant-parameter iterations.
RecoveryResult reconstruct_fixed(const Signal& observed, const AvailabilityMask& mask,
                                 const GradientParams& params, const RecoveryOptions& options = {});

/// Like reconstruct_fixed, with delta and mu reduced on stalled progress.
/// Stops once delta drops below target_delta or after max_iterations.
RecoveryResult reconstruct_adaptive(const Signal& observed, const AvailabilityMask& mask,
                                    const GradientParams& params,
                                    const RecoveryOptions& options = {});

/// Runs each entry's (p, delta, mu) for its iteration count, in order.
RecoveryResult reconstruct_scheduled(const Signal& observed, const AvailabilityMask& mask,
                                     std::span<const ScheduleEntry> schedule,
                                     const RecoveryOptions& options = {});

}  // namespace sparse_recovery

#endif  // SPARSE_RECOVERY_GRADIENT_RECOVERY_HPP
