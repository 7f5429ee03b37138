#include "sparse_recovery/direct_search.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <thread>

#include "sparse_recovery/io.hpp"

namespace sparse_recovery {

namespace {

// Spectrum of a signal whose missing samples are free variables:
// X = base + sum_i v_i * column_i.
class FilledSpectrum {
 public:
  FilledSpectrum(const Signal& x, const AvailabilityMask& mask) {
    if (x.size() != mask.size()) throw std::invalid_argument("signal and mask lengths differ");
    const auto plan = dft_plan(x.size());
    base_ = plan->apply(zero_fill(x, mask).samples());
    columns_.resize(mask.missing_count(), std::vector<Complex>(x.size()));
    for (std::size_t i = 0; i < mask.missing_count(); ++i) {
      plan->impulse_response(mask.missing()[i], columns_[i]);
    }
  }

  std::size_t size() const noexcept { return base_.size(); }

  void evaluate(std::span<const double> values, std::span<Complex> out) const {
    for (std::size_t k = 0; k < base_.size(); ++k) {
      Complex z = base_[k];
      for (std::size_t i = 0; i < values.size(); ++i) z += values[i] * columns_[i][k];
      out[k] = z;
    }
  }

 private:
  std::vector<Complex> base_;
  std::vector<std::vector<Complex>> columns_;
};

std::uint64_t grid_size(std::size_t points, std::size_t axes, std::uint64_t budget) {
  // Saturates at budget + 1 so callers can report the overflow.
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < axes; ++i) {
    if (total > (budget + 1) / points) return budget + 1;
    total *= points;
  }
  return total;
}

struct Best {
  double cost = std::numeric_limits<double>::infinity();
  std::uint64_t index = 0;
  bool found = false;
};

// Scans linear grid indices [lo, hi); the first axis is the most significant
// digit, so ascending linear order is lexicographic order on index vectors.
Best scan_range(const FilledSpectrum& spectrum, const MeasureSpec& measure,
                const std::vector<std::vector<double>>& axes, std::uint64_t lo,
                std::uint64_t hi) {
  const std::size_t m = axes.size();
  const std::size_t points = axes.empty() ? 1 : axes[0].size();
  std::vector<std::size_t> digits(m);
  std::uint64_t rest = lo;
  for (std::size_t a = m; a-- > 0;) {
    digits[a] = static_cast<std::size_t>(rest % points);
    rest /= points;
  }
  std::vector<double> values(m);
  std::vector<Complex> X(spectrum.size());
  Best best;
  for (std::uint64_t idx = lo; idx < hi; ++idx) {
    for (std::size_t a = 0; a < m; ++a) values[a] = axes[a][digits[a]];
    spectrum.evaluate(values, X);
    const double cost = concentration_cost(measure, X);
    if (!best.found || cost < best.cost) best = {cost, idx, true};
    for (std::size_t a = m; a-- > 0;) {
      if (++digits[a] < points) break;
      digits[a] = 0;
    }
  }
  return best;
}

template <typename Scan>
Best parallel_scan(std::uint64_t total, unsigned workers, Scan scan) {
  workers = std::max(1u, workers);
  if (workers == 1 || total < 2 * static_cast<std::uint64_t>(workers)) return scan(0, total);
  std::vector<Best> partial(workers);
  std::vector<std::thread> threads;
  const std::uint64_t chunk = (total + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t lo = std::min(total, w * chunk);
    const std::uint64_t hi = std::min(total, lo + chunk);
    threads.emplace_back([&, w, lo, hi] { partial[w] = scan(lo, hi); });
  }
  for (auto& t : threads) t.join();
  // Chunks are in ascending index order; strict < keeps the earliest tie.
  Best best;
  for (const auto& p : partial) {
    if (p.found && (!best.found || p.cost < best.cost)) best = p;
  }
  return best;
}

}  // namespace

double SearchGrid::value(std::size_t axis, std::size_t j) const {
  return centers.at(axis) +
         (static_cast<double>(j) - static_cast<double>(points_per_axis - 1) / 2.0) * step();
}

void SearchGrid::validate() const {
  if (points_per_axis < 2) throw std::invalid_argument("grid needs at least 2 points per axis");
  if (!std::isfinite(half_width) || half_width <= 0.0) {
    throw std::invalid_argument("grid half width must be finite and positive");
  }
  if (!(step() > 0.0)) throw std::invalid_argument("grid step underflows to zero");
  for (double c : centers) {
    if (!std::isfinite(c)) throw std::invalid_argument("grid centre must be finite");
  }
}

std::string_view to_string(ShrinkMode mode) {
  return mode == ShrinkMode::Cell ? "cell" : "half-cell";
}

ShrinkMode parse_shrink_mode(std::string_view text) {
  if (text == "cell") return ShrinkMode::Cell;
  if (text == "half-cell") return ShrinkMode::HalfCell;
  throw std::invalid_argument("unknown shrink mode '" + std::string(text) +
                              "' (expected cell or half-cell)");
}

void RefinePolicy::validate() const {
  if (rounds < 1) throw std::invalid_argument("refinement needs at least one round");
  if (rounds > max_rounds) {
    throw std::invalid_argument("refinement rounds " + std::to_string(rounds) +
                                " exceed the maximum of " + std::to_string(max_rounds));
  }
}

Signal fill_missing(const Signal& x, const AvailabilityMask& mask, std::span<const double> values) {
  if (values.size() != mask.missing_count()) {
    throw std::invalid_argument("fill_missing: expected one value per missing sample");
  }
  auto y = x.values();
  for (std::size_t i = 0; i < values.size(); ++i) y.at(mask.missing()[i]) = values[i];
  return Signal(std::move(y));
}

GridSearchResult grid_search_round(const Signal& x, const AvailabilityMask& mask,
                                   const MeasureSpec& measure, const SearchGrid& grid,
                                   const SearchOptions& options) {
  measure.validate();
  grid.validate();
  const std::size_t m = mask.missing_count();
  if (m == 0) throw std::invalid_argument("direct search needs at least one missing sample");
  if (grid.centers.size() != m) {
    throw std::invalid_argument("grid must have one axis per missing sample");
  }
  const std::size_t points = grid.points_per_axis;
  const std::uint64_t total = grid_size(points, m, options.evaluation_budget);
  if (total > options.evaluation_budget) {
    throw BudgetExceeded("grid of " + std::to_string(points) + "^" + std::to_string(m) +
                         " points exceeds the evaluation budget of " +
                         std::to_string(options.evaluation_budget));
  }

  std::vector<std::vector<double>> axes(m, std::vector<double>(points));
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t j = 0; j < points; ++j) axes[a][j] = grid.value(a, j);
  }

  const FilledSpectrum spectrum(x, mask);
  const Best best = parallel_scan(total, options.workers, [&](std::uint64_t lo, std::uint64_t hi) {
    return scan_range(spectrum, measure, axes, lo, hi);
  });

  GridSearchResult result;
  result.values.resize(m);
  std::uint64_t rest = best.index;
  for (std::size_t a = m; a-- > 0;) {
    result.values[a] = axes[a][static_cast<std::size_t>(rest % points)];
    rest /= points;
  }
  result.measure_value = best.cost;
  result.evaluations = total;
  return result;
}

RefineResult refine_search(const Signal& x, const AvailabilityMask& mask,
                           const MeasureSpec& measure, double initial_range,
                           std::size_t points_per_axis, const RefinePolicy& policy,
                           const SearchOptions& options) {
  policy.validate();
  SearchGrid grid{std::vector<double>(mask.missing_count(), 0.0), initial_range, points_per_axis};
  RefineResult result;
  for (std::size_t r = 0; r < policy.rounds; ++r) {
    const auto round = grid_search_round(x, mask, measure, grid, options);
    const double step = grid.step();
    result.rounds.push_back({grid.centers, grid.half_width, step, round.values, round.measure_value});
    result.evaluations += round.evaluations;
    result.values = round.values;
    result.accuracy_bound = step / 2.0;
    grid.centers = round.values;
    grid.half_width = policy.shrink == ShrinkMode::Cell ? step : step / 2.0;
  }
  return result;
}

std::pair<std::size_t, std::size_t> MeasureSurface::argmin() const {
  const auto it = std::min_element(values.begin(), values.end());
  const auto flat = static_cast<std::size_t>(it - values.begin());
  return {flat / axis.size(), flat % axis.size()};
}

MeasureSurface measure_surface(const Signal& x, const AvailabilityMask& mask, double range,
                               double step, double p, const SearchOptions& options) {
  if (mask.missing_count() != 2) {
    throw std::invalid_argument("measure surface needs exactly 2 missing samples, got " +
                                std::to_string(mask.missing_count()));
  }
  if (!(range > 0.0) || !(step > 0.0) || !std::isfinite(range) || !std::isfinite(step)) {
    throw std::invalid_argument("surface range and step must be finite and positive");
  }
  const double cells = 2.0 * range / step;
  const double rounded = std::round(cells);
  if (std::abs(cells - rounded) > 1e-9 * std::max(1.0, rounded)) {
    throw std::invalid_argument("surface step must divide 2*range into an integer number of cells");
  }
  const auto points = static_cast<std::size_t>(rounded) + 1;
  const std::uint64_t total = static_cast<std::uint64_t>(points) * points;
  if (total > options.evaluation_budget) {
    throw BudgetExceeded("surface of " + std::to_string(points) + "^2 points exceeds the evaluation budget of " +
                         std::to_string(options.evaluation_budget));
  }

  MeasureSurface surface;
  surface.axis.resize(points);
  const double mid = static_cast<double>(points - 1) / 2.0;
  for (std::size_t j = 0; j < points; ++j) surface.axis[j] = (static_cast<double>(j) - mid) * step;
  surface.values.resize(total);

  const FilledSpectrum spectrum(x, mask);
  const LpMeasure lp(p);
  auto fill_rows = [&](std::size_t row_lo, std::size_t row_hi) {
    std::vector<Complex> X(spectrum.size());
    double values[2];
    for (std::size_t i = row_lo; i < row_hi; ++i) {
      values[0] = surface.axis[i];
      for (std::size_t j = 0; j < points; ++j) {
        values[1] = surface.axis[j];
        spectrum.evaluate(values, X);
        surface.values[i * points + j] = lp(X);
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(options.workers, points));
  if (workers == 1) {
    fill_rows(0, points);
  } else {
    std::vector<std::thread> threads;
    const std::size_t chunk = (points + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t lo = std::min(points, w * chunk);
      threads.emplace_back(fill_rows, lo, std::min(points, lo + chunk));
    }
    for (auto& t : threads) t.join();
  }
  return surface;
}

void write_surface_csv(const std::filesystem::path& path, const MeasureSurface& surface) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  std::string line;
  for (double a : surface.axis) {
    line += ',';
    line += format_number(a);
  }
  out << line << '\n';
  for (std::size_t i = 0; i < surface.size(); ++i) {
    line = format_number(surface.axis[i]);
    for (std::size_t j = 0; j < surface.size(); ++j) {
      line += ',';
      line += format_number(surface.at(i, j));
    }
    out << line << '\n';
  }
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

MeasureSurface read_surface_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };
  MeasureSurface surface;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument(path.string() + ": empty surface file");
  const auto header = split(line);
  for (std::size_t j = 1; j < header.size(); ++j) surface.axis.push_back(parse_number(header[j]));
  const std::size_t n = surface.axis.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw std::invalid_argument(path.string() + ": truncated surface");
    const auto cells = split(line);
    if (cells.size() != n + 1) throw std::invalid_argument(path.string() + ": ragged surface row");
    for (std::size_t j = 1; j <= n; ++j) surface.values.push_back(parse_number(cells[j]));
  }
  return surface;
}

}  // namespace sparse_recovery
