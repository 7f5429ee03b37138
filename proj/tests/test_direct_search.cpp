#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>

#include "sparse_recovery/direct_search.hpp"
#include "sparse_recovery/measures.hpp"
#include "sparse_recovery/signal_model.hpp"

using namespace sparse_recovery;

namespace {

// Brute force over a 1-D grid with full transforms, first minimum wins.
double oracle_1d(const Signal& x, std::size_t n, const std::vector<double>& candidates, double p) {
  double best = 0.0;
  double best_m = INFINITY;
  for (double v : candidates) {
    auto y = x.values();
    y[n] = v;
    const double m = measure_lp(dft_forward(Signal(y)), p);
    if (m < best_m) {
      best_m = m;
      best = v;
    }
  }
  return best;
}

std::filesystem::path scratch_dir() {
  const char* env = std::getenv("SPARSE_RECOVER_TEST_TMP");
  auto dir = (env ? std::filesystem::path(env) : std::filesystem::temp_directory_path() / "sparse_recovery_tests") / "direct_search";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("grid geometry") {
  const SearchGrid g{{0.5}, 1.0, 5};
  CHECK(g.step() == 0.5);
  CHECK(g.value(0, 0) == -0.5);
  CHECK(g.value(0, 2) == 0.5);
  CHECK(g.value(0, 4) == 1.5);
  CHECK_THROWS_AS((SearchGrid{{0.0}, 1.0, 1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((SearchGrid{{0.0}, -1.0, 5}.validate()), std::invalid_argument);
  CHECK(parse_shrink_mode("half-cell") == ShrinkMode::HalfCell);
  CHECK_THROWS_AS(parse_shrink_mode("quarter"), std::invalid_argument);
}

TEST_CASE("one missing sample on a grid point is recovered exactly") {
  const Signal x = synth_multitone(single_tone_components(), 256);
  for (std::size_t n : {6, 31, 100}) {
    const AvailabilityMask mask(256, {n});
    const Signal observed = zero_fill(x, mask);
    const SearchGrid grid{{x[n]}, 1.0, 9};
    const auto r = grid_search_round(observed, mask, MeasureSpec{}, grid);
    CHECK(r.values[0] == x[n]);
    std::vector<double> cand;
    for (std::size_t j = 0; j < 9; ++j) cand.push_back(grid.value(0, j));
    CHECK(oracle_1d(observed, n, cand, 1.0) == r.values[0]);
    CHECK(r.evaluations == 9);
  }
}

TEST_CASE("two missing samples over [-5,5] with step 0.01") {
  const Signal x = synth_multitone(single_tone_components(), 256);
  const AvailabilityMask mask(256, {6, 77});
  const Signal observed = zero_fill(x, mask);

  const auto l1 = measure_surface(observed, mask, 5.0, 0.01, 1.0);
  CHECK(l1.size() == 1001);
  auto [i, j] = l1.argmin();
  CHECK(std::abs(l1.axis[i] - x[6]) <= 0.01);
  CHECK(std::abs(l1.axis[j] - x[77]) <= 0.01);

  const auto l2 = measure_surface(observed, mask, 5.0, 0.01, 0.5);
  std::tie(i, j) = l2.argmin();
  CHECK(l2.axis[i] == 0.0);
  CHECK(l2.axis[j] == 0.0);
}

TEST_CASE("operation counts for refinement") {
  const Signal x = synth_multitone(two_tone_components(), 256);
  {
    const AvailabilityMask mask(256, {40});
    const auto r = refine_search(zero_fill(x, mask), mask, MeasureSpec{}, 1.0, 2001, RefinePolicy{});
    CHECK(r.rounds.size() == 1);
    CHECK(r.rounds[0].step == doctest::Approx(0.001).epsilon(1e-12));
    CHECK(r.evaluations == 2001);
  }
  {
    const auto mask = make_mask_random(256, 7, RngSeed{3});
    const auto r = refine_search(zero_fill(x, mask), mask, MeasureSpec{}, 1.0, 5,
                                 RefinePolicy{7, ShrinkMode::Cell, 20});
    CHECK(r.evaluations == 546875);
  }
  {
    const AvailabilityMask mask(256, {12, 99});
    const auto r = refine_search(zero_fill(x, mask), mask, MeasureSpec{}, 1.0, 5,
                                 RefinePolicy{7, ShrinkMode::HalfCell, 20});
    CHECK(r.rounds.back().step <= 0.001);
    CHECK(r.accuracy_bound == r.rounds.back().step / 2.0);
  }
}

TEST_CASE("ties go to the lexicographically smallest index") {
  const Signal x = synth_multitone(single_tone_components(), 64);
  const AvailabilityMask mask(64, {3, 9});
  // Every candidate has the same duration count.
  const MeasureSpec flat{MeasureKind::NormZero, 1.0, 1e12};
  const SearchGrid grid{{0.0, 0.0}, 2.0, 5};
  const auto a = grid_search_round(x, mask, flat, grid);
  CHECK(a.values == std::vector<double>{-2.0, -2.0});
  SearchOptions threaded;
  threaded.workers = 3;
  const auto b = grid_search_round(x, mask, flat, grid, threaded);
  CHECK(b.values == a.values);
}

TEST_CASE("refinement converges and is monotone") {
  for (const auto& components : {single_tone_components(), two_tone_components()}) {
    const Signal x = synth_multitone(components, 256);
    for (std::size_t m = 1; m <= 4; ++m) {
      const auto mask = make_mask_random(256, m, RngSeed{20 + m});
      const auto r = refine_search(zero_fill(x, mask), mask, MeasureSpec{}, 6.0, 5,
                                   RefinePolicy{15, ShrinkMode::Cell, 20});
      for (std::size_t k = 1; k < r.rounds.size(); ++k) {
        CHECK(r.rounds[k].measure_value <= r.rounds[k - 1].measure_value);
      }
      for (std::size_t i = 0; i < m; ++i) {
        CHECK(std::abs(r.values[i] - x[mask.missing()[i]]) <= r.rounds.back().step);
      }
    }
  }
}

TEST_CASE("threaded scan matches sequential") {
  const Signal x = synth_multitone(two_tone_components(), 128);
  const auto mask = make_mask_random(128, 3, RngSeed{4});
  const SearchGrid grid{{0.0, 0.0, 0.0}, 5.0, 11};
  const auto seq = grid_search_round(x, mask, MeasureSpec{}, grid);
  for (unsigned w : {2u, 4u, 7u}) {
    SearchOptions o;
    o.workers = w;
    const auto par = grid_search_round(x, mask, MeasureSpec{}, grid, o);
    CHECK(par.values == seq.values);
    CHECK(par.measure_value == seq.measure_value);
  }
}

TEST_CASE("budget and argument errors") {
  const Signal x = synth_multitone(two_tone_components(), 256);
  const auto mask = make_mask_random(256, 11, RngSeed{1});
  const SearchGrid grid{std::vector<double>(11, 0.0), 1.0, 5};
  CHECK_THROWS_AS(grid_search_round(x, mask, MeasureSpec{}, grid), BudgetExceeded);
  SearchOptions small;
  small.evaluation_budget = 24;
  const AvailabilityMask two(256, {1, 2});
  CHECK_THROWS_AS(grid_search_round(x, two, MeasureSpec{}, SearchGrid{{0.0, 0.0}, 1.0, 5}, small),
                  BudgetExceeded);
  CHECK_THROWS_AS(grid_search_round(x, AvailabilityMask::none(256), MeasureSpec{}, SearchGrid{{}, 1.0, 5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(refine_search(x, two, MeasureSpec{}, 1.0, 5, RefinePolicy{21, ShrinkMode::Cell, 20}),
                  std::invalid_argument);
  CHECK_THROWS_AS(measure_surface(x, mask, 5.0, 0.01, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(measure_surface(x, two, 5.0, 0.03, 1.0), std::invalid_argument);
}

TEST_CASE("surface symmetry and csv round trip") {
  const Signal zero = Signal::zeros(32);
  const AvailabilityMask mask(32, {4, 20});
  const auto s = measure_surface(zero, mask, 1.0, 0.25, 1.0);
  const std::size_t n = s.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(s.at(i, j) == doctest::Approx(s.at(n - 1 - i, n - 1 - j)).epsilon(1e-13));
    }
  }
  const auto path = scratch_dir() / "surface.csv";
  write_surface_csv(path, s);
  const auto back = read_surface_csv(path);
  CHECK(back.axis == s.axis);
  CHECK(back.values == s.values);
}

TEST_CASE("fill missing") {
  const Signal x = synth_multitone(single_tone_components(), 16);
  const AvailabilityMask mask(16, {2, 5});
  const std::vector<double> v{1.5, -2.0};
  const Signal y = fill_missing(x, mask, v);
  CHECK(y[2] == 1.5);
  CHECK(y[5] == -2.0);
  CHECK(y[3] == x[3]);
  CHECK_THROWS_AS(fill_missing(x, mask, std::vector<double>{1.0}), std::invalid_argument);
}
