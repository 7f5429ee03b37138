#include <doctest.h>

#include <cmath>
#include <sstream>

#include "sparse_recovery/gradient_recovery.hpp"
#include "sparse_recovery/measures.hpp"
#include "sparse_recovery/signal_model.hpp"

using namespace sparse_recovery;

namespace {

// Two-sided measure difference replayed from scratch with full transforms.
double oracle_gradient(const Signal& y, std::size_t n, double p, double delta) {
  auto plus = y.values();
  auto minus = y.values();
  plus[n] += delta;
  minus[n] -= delta;
  const double mp = measure_lp(dft_forward(Signal(plus)), p);
  const double mm = measure_lp(dft_forward(Signal(minus)), p);
  return (mp - mm) / (2.0 * delta);
}

struct Problem {
  Signal truth;
  AvailabilityMask mask;
  Signal observed;
};

Problem problem(std::size_t missing, std::uint64_t seed) {
  Signal truth = synth_multitone(three_tone_components(), 256);
  auto mask = make_mask_random(256, missing, RngSeed{seed});
  Signal observed = zero_fill(truth, mask);
  return {truth, mask, observed};
}

RecoveryOptions with_truth(const Signal& truth) {
  RecoveryOptions o;
  o.truth = truth;
  return o;
}

double window_mean(const ReconstructionTrace& t, std::size_t lo, std::size_t hi) {
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) s += t.records[i].mae;
  return s / static_cast<double>(hi - lo);
}

}  // namespace

TEST_CASE("gradient is zero on available positions and matches the definition") {
  const auto pr = problem(60, 2);
  auto y = pr.observed.values();
  for (auto n : pr.mask.missing()) y[n] = 0.1 * static_cast<double>(n % 7) - 0.3;
  const Signal ys(y);
  RecoveryOptions full;
  full.probe_mode = ProbeMode::Full;
  for (double p : {1.0, 0.9, 2.0 / 3.0}) {
    const auto g_full = gradient_estimate(ys, pr.mask, p, 0.5, full);
    const auto g_inc = gradient_estimate(ys, pr.mask, p, 0.5);
    double scale = 0.0;
    for (double v : g_full) scale = std::max(scale, std::abs(v));
    for (std::size_t n = 0; n < 256; ++n) {
      if (!pr.mask.is_missing(n)) {
        CHECK(g_full[n] == 0.0);
        CHECK(g_inc[n] == 0.0);
      } else {
        CHECK(g_full[n] == oracle_gradient(ys, n, p, 0.5));
        CHECK(std::abs(g_inc[n] - g_full[n]) <= 1e-12 * std::max(1.0, scale));
      }
    }
  }
  const auto none = gradient_estimate(pr.truth, AvailabilityMask::none(256), 1.0, 1.0);
  for (double v : none) CHECK(v == 0.0);
}

TEST_CASE("sign of the gradient follows the error") {
  const Signal x = synth_multitone(single_tone_components(), 256);
  const double delta = 0.05;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    const auto mask = make_mask_random(256, 1, RngSeed{s});
    const std::size_t n = mask.missing()[0];
    auto above = x.values();
    auto below = x.values();
    above[n] += 10 * delta;
    below[n] -= 10 * delta;
    CHECK(gradient_estimate(Signal(above), mask, 1.0, delta)[n] > 0.0);
    CHECK(gradient_estimate(Signal(below), mask, 1.0, delta)[n] < 0.0);
  }
}

TEST_CASE("gradient step") {
  const Signal y = synth_multitone(two_tone_components(), 8);
  CHECK(gradient_step(y, std::vector<double>(8, 0.0), 3.0) == y);
  std::vector<double> g(8, 0.0);
  g[3] = 0.5;
  const Signal z = gradient_step(y, g, 2.0);
  CHECK(z[3] == y[3] - 1.0);
  for (std::size_t n = 0; n < 8; ++n) if (n != 3) CHECK(z[n] == y[n]);
  CHECK_THROWS_AS(gradient_step(y, std::vector<double>(7, 0.0), 1.0), std::invalid_argument);
}

TEST_CASE("fixed reconstruction") {
  const auto full = problem(0, 1);
  GradientParams g;
  g.max_iterations = 25;
  CHECK(reconstruct_fixed(full.observed, full.mask, g).signal == full.observed);

  const auto pr = problem(200, 7);
  auto options = with_truth(pr.truth);
  bool available_untouched = true;
  options.on_iteration = [&](const IterationRecord&, std::span<const double> y) {
    for (std::size_t n = 0; n < 256; ++n) {
      if (!pr.mask.is_missing(n) && y[n] != pr.observed[n]) available_untouched = false;
    }
  };
  GradientParams coarse;  // delta 2, mu 3
  coarse.max_iterations = 600;
  const auto a = reconstruct_fixed(pr.observed, pr.mask, coarse, options);
  CHECK(available_untouched);
  CHECK(a.trace.records.size() == 600);
  const double plateau = window_mean(a.trace, 400, 600);
  CHECK(plateau > 0.0);
  CHECK(plateau < 0.2 * a.trace.initial_mae);
  CHECK(window_mean(a.trace, 400, 500) == doctest::Approx(window_mean(a.trace, 500, 600)).epsilon(0.1));

  GradientParams fine = coarse;
  fine.delta /= 10;
  fine.mu /= 10;
  fine.target_delta = 1e-13;
  fine.max_iterations = 2500;
  const auto b = reconstruct_fixed(pr.observed, pr.mask, fine, with_truth(pr.truth));
  CHECK(window_mean(b.trace, 2300, 2500) < plateau);
  // The finer run has not settled by the time the coarse one has.
  CHECK(window_mean(b.trace, 400, 600) > window_mean(b.trace, 2300, 2500));
}

TEST_CASE("adaptive reconstruction") {
  const auto pr = problem(150, 11);
  GradientParams g;
  g.delta = 20;
  g.mu = 20;
  g.max_iterations = 1000;
  const auto r = reconstruct_adaptive(pr.observed, pr.mask, g, with_truth(pr.truth));
  CHECK(mae(pr.truth, r.signal) <= 1e-12);
  CHECK(r.trace.records.size() <= 1000);

  const auto& ev = r.trace.events;
  REQUIRE(!ev.empty());
  for (std::size_t j = 1; j < ev.size(); ++j) CHECK(ev[j] > ev[j - 1]);
  // Delta in use at each iteration is delta0 / factor^j after j reductions.
  std::size_t j = 0;
  for (const auto& rec : r.trace.records) {
    CHECK(rec.delta == doctest::Approx(g.delta / std::pow(g.reduction_factor, j)).epsilon(1e-13));
    CHECK(rec.mu == doctest::Approx(g.mu / std::pow(g.reduction_factor, j)).epsilon(1e-13));
    if (j < ev.size() && rec.k == ev[j]) ++j;
  }
  for (std::size_t i = 1; i < r.trace.records.size(); ++i) {
    CHECK(r.trace.records[i].delta <= r.trace.records[i - 1].delta);
  }
  // Before the first reduction the measure only falls, up to the trigger scale.
  double prev = r.trace.initial_measure;
  double largest = 0.0;
  for (const auto& rec : r.trace.records) {
    if (rec.k >= ev.front()) break;
    CHECK(rec.measure <= prev + g.reduction_threshold * largest);
    largest = std::max(largest, std::abs(prev - rec.measure));
    prev = rec.measure;
  }
}

TEST_CASE("threshold zero disables reduction") {
  const auto pr = problem(100, 3);
  GradientParams g;
  g.reduction_threshold = 0.0;
  g.max_iterations = 150;
  const auto a = reconstruct_adaptive(pr.observed, pr.mask, g);
  const auto b = reconstruct_fixed(pr.observed, pr.mask, g);
  CHECK(a.trace.events.empty());
  CHECK(a.signal == b.signal);
  CHECK(a.trace.records.size() == b.trace.records.size());
}

TEST_CASE("schedules") {
  const auto pr = problem(200, 5);
  GradientParams g;
  g.delta = 1.5;
  g.mu = 2.5;
  g.p = 0.95;
  g.max_iterations = 40;
  const std::vector<ScheduleEntry> single{{0.95, 1.5, 2.5, 40}};
  const auto s = reconstruct_scheduled(pr.observed, pr.mask, single);
  const auto f = reconstruct_fixed(pr.observed, pr.mask, g);
  CHECK(s.signal == f.signal);
  for (std::size_t i = 0; i < 40; ++i) CHECK(s.trace.records[i].measure == f.trace.records[i].measure);

  const std::vector<ScheduleEntry> staged{{0.9, 1.0, 10.0, 12}, {0.95, 2.0, 4.0, 10}, {1.0, 1.0, 2.0, 78}};
  GradientParams constant;
  constant.delta = 1.0;
  constant.mu = 2.0;
  constant.max_iterations = 100;
  const auto sched = reconstruct_scheduled(pr.observed, pr.mask, staged, with_truth(pr.truth));
  const auto cons = reconstruct_fixed(pr.observed, pr.mask, constant, with_truth(pr.truth));
  REQUIRE(sched.trace.records.size() == 100);
  CHECK(sched.trace.records[12].p == 0.95);
  CHECK(sched.trace.records[22].p == 1.0);
  CHECK(sched.trace.records[19].mae < cons.trace.records[19].mae);

  // Ending at p = 1 lands in the band of the long constant p = 1 run.
  std::vector<ScheduleEntry> longer = staged;
  longer.back().iterations = 1978;
  constant.max_iterations = 2000;
  const auto ls = reconstruct_scheduled(pr.observed, pr.mask, longer, with_truth(pr.truth));
  const auto lc = reconstruct_fixed(pr.observed, pr.mask, constant, with_truth(pr.truth));
  const double band = window_mean(lc.trace, 1800, 2000);
  CHECK(window_mean(ls.trace, 1800, 2000) <= 2.0 * band);
  CHECK(window_mean(ls.trace, 1800, 2000) >= 0.5 * band);

  CHECK_THROWS_AS(reconstruct_scheduled(pr.observed, pr.mask, std::vector<ScheduleEntry>{}),
                  std::invalid_argument);
  CHECK_THROWS_AS(reconstruct_scheduled(pr.observed, pr.mask, std::vector<ScheduleEntry>{{1.0, 1.0, 1.0, 0}}),
                  std::invalid_argument);
}

TEST_CASE("determinism across runs, probe modes and workers") {
  const auto pr = problem(120, 9);
  GradientParams g;
  g.max_iterations = 60;
  const auto a = reconstruct_adaptive(pr.observed, pr.mask, g);
  const auto b = reconstruct_adaptive(pr.observed, pr.mask, g);
  CHECK(a.signal == b.signal);
  std::ostringstream ta, tb;
  write_trace_csv(ta, a.trace);
  write_trace_csv(tb, b.trace);
  CHECK(ta.str() == tb.str());
  CHECK(ta.str().rfind("k,measure,delta,mu,p,mae,event\n", 0) == 0);

  for (unsigned w : {2u, 3u, 8u}) {
    RecoveryOptions o;
    o.workers = w;
    const auto c = reconstruct_adaptive(pr.observed, pr.mask, g, o);
    for (std::size_t n = 0; n < 256; ++n) CHECK(std::abs(c.signal[n] - a.signal[n]) <= 1e-12);
  }

  RecoveryOptions full;
  full.probe_mode = ProbeMode::Full;
  GradientParams shortrun = g;
  shortrun.max_iterations = 10;
  const auto inc = reconstruct_fixed(pr.observed, pr.mask, shortrun);
  const auto fl = reconstruct_fixed(pr.observed, pr.mask, shortrun, full);
  for (std::size_t n = 0; n < 256; ++n) CHECK(std::abs(inc.signal[n] - fl.signal[n]) <= 1e-10);
}

TEST_CASE("parameter validation and divergence") {
  const auto pr = problem(10, 1);
  GradientParams bad;
  bad.delta = 0.0;
  CHECK_THROWS_AS(reconstruct_fixed(pr.observed, pr.mask, bad), std::invalid_argument);
  bad = {};
  bad.reduction_threshold = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = {};
  bad.reduction_factor = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = {};
  bad.target_delta = 5.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = {};
  bad.p = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  GradientParams wild;
  wild.mu = 1e308;
  wild.max_iterations = 50;
  CHECK_THROWS_AS(reconstruct_fixed(pr.observed, pr.mask, wild), DivergenceError);

  RecoveryOptions o;
  o.truth = Signal::zeros(10);
  CHECK_THROWS_AS(reconstruct_fixed(pr.observed, pr.mask, GradientParams{}, o), std::invalid_argument);
}
