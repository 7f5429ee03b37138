#ifndef SPARSE_RECOVERY_DIRECT_SEARCH_HPP
#define SPARSE_RECOVERY_DIRECT_SEARCH_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "sparse_recovery/measures.hpp"
#include "sparse_recovery/signal_model.hpp"
#include "sparse_recovery/transform.hpp"

namespace sparse_recovery {

/// Thrown when a grid would need more measure evaluations than allowed.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One axis per missing sample, each with `points_per_axis` values
/// center + (j - (L-1)/2) * step, step = 2 * half_width / (L-1).
struct SearchGrid {
  std::vector<double> centers;
  double half_width = 1.0;
  std::size_t points_per_axis = 5;

  double step() const { return 2.0 * half_width / static_cast<double>(points_per_axis - 1); }
  double value(std::size_t axis, std::size_t j) const;
  void validate() const;
};

enum class ShrinkMode {
  Cell,      ///< next half width = current step
  HalfCell,  ///< next half width = current step / 2
};

std::string_view to_string(ShrinkMode mode);
ShrinkMode parse_shrink_mode(std::string_view text);  // "cell", "half-cell"

struct RefinePolicy {
  std::size_t rounds = 1;
  ShrinkMode shrink = ShrinkMode::Cell;
  std::size_t max_rounds = 20;

  void validate() const;
};

inline constexpr std::uint64_t kDefaultEvaluationBudget = 10'000'000;

struct SearchOptions {
  std::uint64_t evaluation_budget = kDefaultEvaluationBudget;
  /// Worker threads for grid evaluation. The result does not depend on it.
  unsigned workers = 1;
};

struct GridSearchResult {
  std::vector<double> values;  ///< one per missing sample, in mask order
  double measure_value = 0.0;
  std::uint64_t evaluations = 0;
};

/// Exhaustive minimization of concentration_cost over the L^M grid. Ties go
/// to the lexicographically smallest grid index vector.
GridSearchResult grid_search_round(const Signal& x, const AvailabilityMask& mask,
                                   const MeasureSpec& measure, const SearchGrid& grid,
                                   const SearchOptions& options = {});

struct RefineRound {
  std::vector<double> centers;
  double half_width = 0.0;
  double step = 0.0;
  std::vector<double> values;
  double measure_value = 0.0;
};

struct RefineResult {
  std::vector<double> values;
  std::vector<RefineRound> rounds;
  /// Half of the final round's step.
  double accuracy_bound = 0.0;
  std::uint64_t evaluations = 0;
};

/// Repeated grid rounds on [-A, A]^M: each round recentres every axis on the
/// previous argmin and shrinks the half width per the policy.
RefineResult refine_search(const Signal& x, const AvailabilityMask& mask,
                           const MeasureSpec& measure, double initial_range,
                           std::size_t points_per_axis, const RefinePolicy& policy,
                           const SearchOptions& options = {});

/// Signal with the missing samples of x replaced by `values`.
Signal fill_missing(const Signal& x, const AvailabilityMask& mask, std::span<const double> values);

/// lp measure over a 2-D grid of candidate values for exactly two missing
/// samples. Row i holds the first missing sample at axis[i], column j the
/// second at axis[j].
struct MeasureSurface {
  std::vector<double> axis;
  std::vector<double> values;  ///< row-major, axis.size()^2

  std::size_t size() const noexcept { return axis.size(); }
  double at(std::size_t i, std::size_t j) const { return values[i * axis.size() + j]; }
  /// (row, column) of the smallest value, first in row-major order on ties.
  std::pair<std::size_t, std::size_t> argmin() const;
};

/// Axis values (j - (L-1)/2) * step covering [-range, range]; 2*range/step
/// must be an integer.
MeasureSurface measure_surface(const Signal& x, const AvailabilityMask& mask, double range,
                               double step, double p, const SearchOptions& options = {});

/// First row: empty corner cell then the column axis values; each further
/// row: row axis value then the measure values.
void write_surface_csv(const std::filesystem::path& path, const MeasureSurface& surface);
MeasureSurface read_surface_csv(const std::filesystem::path& path);

}  // namespace sparse_recovery

#endif  // SPARSE_RECOVERY_DIRECT_SEARCH_HPP
