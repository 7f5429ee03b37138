#include "sparse_recovery/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

#include "sparse_recovery/io.hpp"

namespace sparse_recovery {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr std::array<std::string_view, 9> kCatalog = {
    "surface", "bias-sweep", "recon-random", "recon-blocks", "param-study",
    "adaptive", "off-grid", "noisy", "varying-p",
};

// Rounds at which bias-sweep reports the per-sample error.
constexpr std::array<std::size_t, 3> kBiasSweepRounds = {5, 10, 15};

// Length of the trailing window used for plateau statistics.
constexpr std::size_t kPlateauWindow = 200;

std::string label_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string_view to_string(MaskKind kind) {
  switch (kind) {
    case MaskKind::None: return "none";
    case MaskKind::Random: return "random";
    case MaskKind::Blocks: return "blocks";
  }
  return "none";
}

ordered_json number_or_null(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

// Collects artifacts for one run.
class ArtifactWriter {
 public:
  ArtifactWriter(const fs::path& dir, ScenarioReport& report) : dir_(dir), report_(report) {}

  fs::path path(const std::string& file) const { return dir_ / file; }

  void add(const std::string& file, const std::string& role) {
    report_.manifest.push_back({file, role});
  }

  void signal(const std::string& file, const std::string& role, const Signal& x) {
    write_signal_csv(path(file), x);
    add(file, role);
  }

  void trace(const std::string& file, const std::string& role, const ReconstructionTrace& t) {
    write_trace_csv(path(file), t);
    add(file, role);
  }

  void mask(const std::string& file, const AvailabilityMask& m) {
    write_mask_csv(path(file), m);
    add(file, "missing sample indices");
  }

  std::ofstream table(const std::string& file, const std::string& role, const std::string& header) {
    std::ofstream out(path(file), std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path(file).string() + "' for writing");
    out << header << '\n';
    add(file, role);
    return out;
  }

 private:
  fs::path dir_;
  ScenarioReport& report_;
};

Signal difference(const Signal& a, const Signal& b) {
  std::vector<double> d(a.size());
  for (std::size_t n = 0; n < a.size(); ++n) d[n] = a[n] - b[n];
  return Signal(std::move(d));
}

double max_abs(const Signal& x) {
  double m = 0.0;
  for (double v : x.samples()) m = std::max(m, std::abs(v));
  return m;
}

double window_mean_mae(const ReconstructionTrace& trace, std::size_t window) {
  const auto& r = trace.records;
  const std::size_t n = std::min(window, r.size());
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (std::size_t i = r.size() - n; i < r.size(); ++i) sum += r[i].mae;
  return sum / static_cast<double>(n);
}

RecoveryOptions options_with_truth(const Signal& truth) {
  RecoveryOptions options;
  options.truth = truth;
  return options;
}

RecoveryResult run_gradient(const AlgorithmConfig& algorithm, const Signal& observed,
                            const AvailabilityMask& mask, const RecoveryOptions& options) {
  switch (algorithm.kind) {
    case AlgorithmKind::Fixed: return reconstruct_fixed(observed, mask, algorithm.gradient, options);
    case AlgorithmKind::Adaptive:
      return reconstruct_adaptive(observed, mask, algorithm.gradient, options);
    case AlgorithmKind::Scheduled:
      return reconstruct_scheduled(observed, mask, algorithm.schedule, options);
    case AlgorithmKind::DirectSearch: break;
  }
  throw std::invalid_argument("algorithm is not a gradient reconstruction");
}

ScenarioConfig base_config(std::string_view name, std::vector<ToneComponent> components) {
  ScenarioConfig c;
  c.name = std::string(name);
  c.components = std::move(components);
  return c;
}

// Single reconstruction with the standard signal/trace artifacts. Used by
// recon-random, recon-blocks, off-grid and custom.
void run_single(const ScenarioConfig& config, ArtifactWriter& w, ScenarioReport& report) {
  const auto inst = build_instance(config);
  const Signal observed = zero_fill(inst.observed, inst.mask);
  w.signal("signal_original.csv", "original signal", inst.truth);
  if (std::isfinite(config.snr_db)) w.signal("signal_noisy.csv", "noisy signal", inst.observed);
  w.signal("signal_observed.csv", "zero-filled input to the reconstruction", observed);
  w.mask("mask.csv", inst.mask);

  Signal reconstructed = observed;
  auto& s = report.summary;
  if (config.algorithm.kind == AlgorithmKind::DirectSearch) {
    const auto& d = config.algorithm.direct;
    const auto result = refine_search(inst.observed, inst.mask, d.measure, d.range, d.points_per_axis,
                                      d.policy);
    reconstructed = fill_missing(inst.observed, inst.mask, result.values);
    auto out = w.table("refine_rounds.csv", "direct search rounds", "round,half_width,step,measure");
    for (std::size_t r = 0; r < result.rounds.size(); ++r) {
      const auto& rr = result.rounds[r];
      out << r + 1 << ',' << format_number(rr.half_width) << ',' << format_number(rr.step) << ','
          << format_number(rr.measure_value) << '\n';
    }
    s["rounds"] = result.rounds.size();
    s["evaluations"] = result.evaluations;
    s["accuracy_bound"] = result.accuracy_bound;
    s["final_measure"] = result.rounds.back().measure_value;
  } else {
    const auto result = run_gradient(config.algorithm, inst.observed, inst.mask,
                                     options_with_truth(inst.truth));
    reconstructed = result.signal;
    w.trace("trace.csv", "reconstruction trace", result.trace);
    s["iterations"] = result.trace.records.size();
    s["reductions"] = result.trace.events.size();
    s["final_measure"] = result.trace.records.back().measure;
    s["final_delta"] = result.trace.records.back().delta;
    s["final_mu"] = result.trace.records.back().mu;
  }

  const Signal error = difference(inst.truth, reconstructed);
  w.signal("signal_reconstructed.csv", "reconstructed signal", reconstructed);
  w.signal("signal_error.csv", "reconstruction error (original minus reconstructed)", error);
  s["missing"] = inst.mask.missing_count();
  s["zero_fill_mae"] = mae(inst.truth, observed);
  s["final_mae"] = mae(inst.truth, reconstructed);
  s["max_abs_error"] = max_abs(error);
  s["improvement_ratio"] = number_or_null(mae(inst.truth, observed) / mae(inst.truth, reconstructed));
  if (std::isfinite(config.snr_db)) {
    s["snr_in_db"] = snr_db(inst.truth, inst.observed);
    s["snr_out_db"] = number_or_null(snr_db(inst.truth, reconstructed));
  }
}

void run_surface(const ScenarioConfig& config, ArtifactWriter& w, ScenarioReport& report) {
  const auto inst = build_instance(config);
  const auto& d = config.algorithm.direct;
  const double step = 2.0 * d.range / static_cast<double>(d.points_per_axis - 1);
  w.signal("signal_original.csv", "original signal", inst.truth);
  w.mask("mask.csv", inst.mask);
  ordered_json entries = ordered_json::array();
  const auto missing = inst.mask.missing();
  for (double p : config.p_values) {
    const auto surface = measure_surface(inst.observed, inst.mask, d.range, step, p);
    const std::string file = "surface_p" + label_number(p) + ".csv";
    write_surface_csv(w.path(file), surface);
    w.add(file, "measure surface for p=" + label_number(p));
    const auto [i, j] = surface.argmin();
    const double a = surface.axis[i];
    const double b = surface.axis[j];
    entries.push_back({{"p", p},
                       {"argmin", {a, b}},
                       {"true_values", {inst.truth[missing[0]], inst.truth[missing[1]]}},
                       {"min_measure", surface.at(i, j)},
                       {"max_offset_from_truth",
                        std::max(std::abs(a - inst.truth[missing[0]]),
                                 std::abs(b - inst.truth[missing[1]]))}});
  }
  report.summary["step"] = step;
  report.summary["missing_indices"] = {missing[0], missing[1]};
  report.summary["surfaces"] = std::move(entries);
}

void run_bias_sweep(const ScenarioConfig& config, ArtifactWriter& w, ScenarioReport& report) {
  const auto& d = config.algorithm.direct;
  auto per_trial = w.table("bias_sweep_trials.csv", "per-trial per-sample MAE",
                           "missing_count,trial,p,q,rounds,per_sample_mae");
  auto aggregate = w.table("bias_sweep.csv", "per-sample MAE averaged over trials",
                           "missing_count,p,q,rounds,mean_per_sample_mae");
  RefinePolicy policy = d.policy;
  policy.rounds = std::max(policy.rounds, kBiasSweepRounds.back());
  ordered_json entries = ordered_json::array();

  for (std::size_t count : config.sweep_counts) {
    // Grids grow as L^M; the larger case runs a fifth of the trials.
    const std::size_t trials = count <= 4 ? config.trials : std::max<std::size_t>(1, config.trials / 5);
    ScenarioConfig c = config;
    c.mask = {MaskKind::Random, count, {}};
    std::map<std::pair<double, std::size_t>, double> sums;
    for (std::size_t t = 0; t < trials; ++t) {
      const auto inst = build_instance(c, t);
      for (double p : config.p_values) {
        MeasureSpec measure = d.measure;
        measure.kind = MeasureKind::LpForm;
        measure.p = p;
        const auto result = refine_search(inst.observed, inst.mask, measure, d.range,
                                          d.points_per_axis, policy);
        for (std::size_t rounds : kBiasSweepRounds) {
          const auto& values = result.rounds[rounds - 1].values;
          double err = 0.0;
          for (std::size_t i = 0; i < values.size(); ++i) {
            err += std::abs(inst.truth[inst.mask.missing()[i]] - values[i]);
          }
          err /= static_cast<double>(values.size());
          sums[{p, rounds}] += err;
          per_trial << count << ',' << t << ',' << format_number(p) << ',' << format_number(1.0 / p)
                    << ',' << rounds << ',' << format_number(err) << '\n';
        }
      }
    }
    for (double p : config.p_values) {
      ordered_json by_round = ordered_json::object();
      for (std::size_t rounds : kBiasSweepRounds) {
        const double mean = sums[{p, rounds}] / static_cast<double>(trials);
        aggregate << count << ',' << format_number(p) << ',' << format_number(1.0 / p) << ','
                  << rounds << ',' << format_number(mean) << '\n';
        by_round[std::to_string(rounds)] = mean;
      }
      entries.push_back({{"missing_count", count},
                         {"trials", trials},
                         {"p", p},
                         {"q", 1.0 / p},
                         {"mean_per_sample_mae_by_rounds", std::move(by_round)}});
    }
  }
  report.summary["sweep"] = std::move(entries);
}

void run_param_study(const ScenarioConfig& config, ArtifactWriter& w, ScenarioReport& report) {
  const auto inst = build_instance(config);
  const auto missing = inst.mask.missing();
  const std::array<std::size_t, 2> watched = {missing[0], missing[1]};
  const double start = config.algorithm.gradient.delta;
  const std::size_t iterations = config.algorithm.gradient.max_iterations;
  w.signal("signal_original.csv", "original signal", inst.truth);
  w.mask("mask.csv", inst.mask);
  auto errors = w.table("sample_errors.csv", "absolute error of two watched missing samples",
                        "setup,k,index,abs_error");

  struct Setup {
    std::string label;
    AlgorithmConfig algorithm;
  };
  std::vector<Setup> setups;
  for (double scale : {1.0, 0.1, 0.01}) {
    AlgorithmConfig a = config.algorithm;
    a.kind = AlgorithmKind::Fixed;
    a.gradient.delta = start * scale;
    a.gradient.mu = config.algorithm.gradient.mu * scale;
    setups.push_back({"constant_" + label_number(a.gradient.delta), a});
  }
  {
    // Parameters divided by ten after iterations 100 and 200.
    AlgorithmConfig a = config.algorithm;
    a.kind = AlgorithmKind::Scheduled;
    const double p = config.algorithm.gradient.p;
    const double mu = config.algorithm.gradient.mu;
    a.schedule = {{p, start, mu, 100}, {p, start / 10, mu / 10, 100},
                  {p, start / 100, mu / 100, iterations > 200 ? iterations - 200 : 1}};
    setups.push_back({"varied", a});
  }
  {
    AlgorithmConfig a = config.algorithm;
    a.kind = AlgorithmKind::Adaptive;
    setups.push_back({"adaptive", a});
  }

  ordered_json entries = ordered_json::array();
  for (const auto& setup : setups) {
    auto options = options_with_truth(inst.truth);
    options.on_iteration = [&](const IterationRecord& r, std::span<const double> y) {
      for (auto n : watched) {
        errors << setup.label << ',' << r.k << ',' << n << ','
               << format_number(std::abs(inst.truth[n] - y[n])) << '\n';
      }
    };
    const auto result = run_gradient(setup.algorithm, inst.observed, inst.mask, options);
    w.trace("trace_" + setup.label + ".csv", "trace for " + setup.label, result.trace);
    entries.push_back({{"setup", setup.label},
                       {"iterations", result.trace.records.size()},
                       {"final_mae", mae(inst.truth, result.signal)},
                       {"mean_mae_last_window", window_mean_mae(result.trace, kPlateauWindow)}});
  }
  report.summary["watched_indices"] = watched;
  report.summary["setups"] = std::move(entries);
}

void run_adaptive(const ScenarioConfig& config, ArtifactWriter& w, ScenarioReport& report) {
  const auto inst = build_instance(config);
  const Signal observed = zero_fill(inst.observed, inst.mask);
  w.signal("signal_original.csv", "original signal", inst.truth);
  w.signal("signal_observed.csv", "zero-filled input to the reconstruction", observed);
  w.mask("mask.csv", inst.mask);

  const auto& g = config.algorithm.gradient;
  const auto result = reconstruct_adaptive(inst.observed, inst.mask, g, options_with_truth(inst.truth));
  w.trace("trace.csv", "adaptive reconstruction trace", result.trace);
  w.signal("signal_reconstructed.csv", "reconstructed signal", result.signal);
  w.signal("signal_error.csv", "reconstruction error (original minus reconstructed)",
           difference(inst.truth, result.signal));

  auto& s = report.summary;
  s["missing"] = inst.mask.missing_count();
  s["iterations"] = result.trace.records.size();
  s["reductions"] = result.trace.events.size();
  s["final_delta"] = result.trace.records.back().delta;
  s["final_mae"] = mae(inst.truth, result.signal);
  s["final_measure"] = result.trace.records.back().measure;

  // Constant-parameter runs from the same start, one per early parameter regime.
  constexpr std::size_t kConstantIterations = 1000;
  ordered_json constants = ordered_json::array();
  double scale = 1.0;
  for (int regime = 0; regime < 3; ++regime, scale /= g.reduction_factor) {
    GradientParams fixed = g;
    fixed.delta = g.delta * scale;
    fixed.mu = g.mu * scale;
    fixed.max_iterations = kConstantIterations;
    fixed.target_delta = std::min(g.target_delta, fixed.delta / 2);
    const auto run = reconstruct_fixed(inst.observed, inst.mask, fixed, options_with_truth(inst.truth));
    const std::string label = label_number(fixed.delta);
    w.trace("trace_constant_" + label + ".csv", "constant-parameter trace, delta=" + label, run.trace);
    constants.push_back({{"delta", fixed.delta},
                         {"mu", fixed.mu},
                         {"mean_mae_last_window", window_mean_mae(run.trace, kPlateauWindow)}});
  }
  s["constant_runs"] = std::move(constants);
}

void run_off_grid(const ScenarioConfig& config, ArtifactWriter& w, ScenarioReport& report) {
  run_single(config, w, report);
  const auto inst = build_instance(config);
  const auto reconstructed = read_signal_csv(w.path("signal_reconstructed.csv"));
  write_spectrum_magnitude_csv(w.path("spectrum_original.csv"), dft_forward(inst.truth));
  w.add("spectrum_original.csv", "|DFT| of the original signal");
  write_spectrum_magnitude_csv(w.path("spectrum_observed.csv"),
                               dft_forward(zero_fill(inst.observed, inst.mask)));
  w.add("spectrum_observed.csv", "|DFT| of the zero-filled input");
  write_spectrum_magnitude_csv(w.path("spectrum_reconstructed.csv"), dft_forward(reconstructed));
  w.add("spectrum_reconstructed.csv", "|DFT| of the reconstructed signal");
}

void run_noisy(const ScenarioConfig& config, ArtifactWriter& w, ScenarioReport& report) {
  auto per_trial = w.table("noisy_trials.csv", "per-trial SNR", "trial,omitted,snr_in_db,snr_out_db");
  std::map<std::size_t, std::pair<double, double>> sums;
  const std::size_t example_count = config.sweep_counts.empty() ? 0 : config.sweep_counts.back();
  for (std::size_t t = 0; t < config.trials; ++t) {
    for (std::size_t count : config.sweep_counts) {
      ScenarioConfig c = config;
      c.mask = {count == 0 ? MaskKind::None : MaskKind::Random, count, {}};
      const auto inst = build_instance(c, t);
      const auto result = reconstruct_adaptive(inst.observed, inst.mask, config.algorithm.gradient);
      const double in = snr_db(inst.truth, inst.observed);
      const double out = snr_db(inst.truth, result.signal);
      sums[count].first += in;
      sums[count].second += out;
      per_trial << t << ',' << count << ',' << format_number(in) << ',' << format_number(out) << '\n';
      if (t == 0 && count == example_count) {
        w.signal("signal_original.csv", "noise-free signal", inst.truth);
        w.signal("signal_noisy.csv", "noisy signal", inst.observed);
        w.signal("signal_observed.csv", "noisy signal with omitted samples set to zero",
                 zero_fill(inst.observed, inst.mask));
        w.signal("signal_reconstructed.csv", "reconstructed signal", result.signal);
        w.signal("signal_error.csv", "residual noise (original minus reconstructed)",
                 difference(inst.truth, result.signal));
      }
    }
  }
  auto aggregate = w.table("noisy.csv", "SNR averaged over trials",
                           "omitted,mean_snr_in_db,mean_snr_out_db,improvement_db");
  ordered_json entries = ordered_json::array();
  const double trials = static_cast<double>(config.trials);
  for (std::size_t count : config.sweep_counts) {
    const double in = sums[count].first / trials;
    const double out = sums[count].second / trials;
    aggregate << count << ',' << format_number(in) << ',' << format_number(out) << ','
              << format_number(out - in) << '\n';
    entries.push_back({{"omitted", count},
                       {"mean_snr_in_db", in},
                       {"mean_snr_out_db", out},
                       {"improvement_db", out - in}});
  }
  report.summary["trials"] = config.trials;
  report.summary["sweep"] = std::move(entries);
}

void run_varying_p(const ScenarioConfig& config, ArtifactWriter& w, ScenarioReport& report) {
  const auto inst = build_instance(config);
  w.signal("signal_original.csv", "original signal", inst.truth);
  w.mask("mask.csv", inst.mask);
  const auto scheduled = reconstruct_scheduled(inst.observed, inst.mask, config.algorithm.schedule,
                                               options_with_truth(inst.truth));
  const auto constant = reconstruct_fixed(inst.observed, inst.mask, config.algorithm.gradient,
                                          options_with_truth(inst.truth));
  w.trace("trace_schedule.csv", "varying-p schedule trace", scheduled.trace);
  w.trace("trace_constant.csv", "constant-parameter trace", constant.trace);

  const double reference = constant.trace.records.back().mae;
  std::size_t reached = 0;
  for (const auto& r : scheduled.trace.records) {
    if (r.mae <= reference) {
      reached = r.k;
      break;
    }
  }
  auto mae_at = [](const ReconstructionTrace& t, std::size_t k) {
    return k <= t.records.size() ? t.records[k - 1].mae : std::numeric_limits<double>::quiet_NaN();
  };
  auto& s = report.summary;
  s["constant_iterations"] = constant.trace.records.size();
  s["constant_final_mae"] = reference;
  s["schedule_iterations"] = scheduled.trace.records.size();
  s["schedule_final_mae"] = mae(inst.truth, scheduled.signal);
  s["schedule_first_iteration_at_constant_final_mae"] = reached;
  s["schedule_mae_at_20"] = number_or_null(mae_at(scheduled.trace, 20));
  s["constant_mae_at_20"] = number_or_null(mae_at(constant.trace, 20));
}

ordered_json gradient_to_json(const GradientParams& g) {
  return {{"delta", g.delta},
          {"mu", g.mu},
          {"p", g.p},
          {"P", g.reduction_threshold},
          {"reduction_factor", g.reduction_factor},
          {"max_iterations", g.max_iterations},
          {"target_delta", g.target_delta}};
}

}  // namespace

std::string_view to_string(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::Fixed: return "fixed";
    case AlgorithmKind::Adaptive: return "adaptive";
    case AlgorithmKind::Scheduled: return "scheduled";
    case AlgorithmKind::DirectSearch: return "direct-search";
  }
  return "adaptive";
}

std::span<const std::string_view> scenario_catalog() { return kCatalog; }

bool is_catalog_scenario(std::string_view name) {
  return std::find(kCatalog.begin(), kCatalog.end(), name) != kCatalog.end();
}

ScenarioConfig default_scenario_config(std::string_view name) {
  if (name == "custom") return ScenarioConfig{};
  if (name == "surface") {
    auto c = base_config(name, single_tone_components());
    c.mask = {MaskKind::Random, 2, {}};
    c.p_values = {0.5, 1.0, 2.0};
    c.algorithm.kind = AlgorithmKind::DirectSearch;
    c.algorithm.direct.range = 5.0;
    c.algorithm.direct.points_per_axis = 1001;  // step 0.01
    c.algorithm.direct.policy.rounds = 1;
    return c;
  }
  if (name == "bias-sweep") {
    auto c = base_config(name, two_tone_components());
    c.mask = {MaskKind::Random, 4, {}};
    c.sweep_counts = {4, 7};
    c.p_values = {2.0, 1.0, 2.0 / 3.0, 0.5};  // q = 0.5, 1, 1.5, 2
    c.algorithm.kind = AlgorithmKind::DirectSearch;
    c.algorithm.direct.range = 5.0;
    c.algorithm.direct.points_per_axis = 5;
    c.algorithm.direct.policy = {15, ShrinkMode::Cell, 20};
    return c;
  }
  if (name == "recon-random" || name == "recon-blocks") {
    auto c = base_config(name, three_tone_components());
    c.mask = name == "recon-random" ? MaskConfig{MaskKind::Random, 200, {}}
                                    : MaskConfig{MaskKind::Blocks, 200, {67, 67, 66}};
    c.algorithm.kind = AlgorithmKind::Fixed;
    c.algorithm.gradient.delta = 2.0;
    c.algorithm.gradient.mu = 3.0;
    c.algorithm.gradient.p = 1.0;
    c.algorithm.gradient.max_iterations = 300;
    return c;
  }
  if (name == "param-study") {
    auto c = base_config(name, three_tone_components());
    c.mask = {MaskKind::Random, 200, {}};
    c.algorithm.kind = AlgorithmKind::Adaptive;
    c.algorithm.gradient.delta = 20.0;
    c.algorithm.gradient.mu = 20.0;
    // Long enough for the smallest constant setting to settle.
    c.algorithm.gradient.max_iterations = 2000;
    return c;
  }
  if (name == "adaptive") {
    auto c = base_config(name, three_tone_components());
    c.mask = {MaskKind::Random, 150, {}};
    c.algorithm.kind = AlgorithmKind::Adaptive;
    c.algorithm.gradient.delta = 20.0;
    c.algorithm.gradient.mu = 20.0;
    c.algorithm.gradient.max_iterations = 1000;
    return c;
  }
  if (name == "off-grid") {
    auto c = base_config(name, off_grid_tone_components());
    c.mask = {MaskKind::Random, 70, {}};
    c.algorithm.kind = AlgorithmKind::Fixed;
    c.algorithm.gradient.delta = 3.0;
    c.algorithm.gradient.mu = 4.0;
    c.algorithm.gradient.max_iterations = 300;
    return c;
  }
  if (name == "noisy") {
    auto c = base_config(name, three_tone_components());
    c.mask = {MaskKind::Random, 150, {}};
    c.snr_db = 10.0;
    c.sweep_counts = {0, 50, 100, 150, 200};
    c.algorithm.kind = AlgorithmKind::Adaptive;
    c.algorithm.gradient.delta = 2.0;
    c.algorithm.gradient.mu = 2.0;
    c.algorithm.gradient.max_iterations = 2000;
    c.algorithm.gradient.target_delta = 1e-6;
    return c;
  }
  if (name == "varying-p") {
    auto c = base_config(name, three_tone_components());
    c.mask = {MaskKind::Random, 200, {}};
    c.algorithm.kind = AlgorithmKind::Scheduled;
    c.algorithm.schedule = {{0.9, 1.0, 10.0, 12}, {0.95, 2.0, 4.0, 10}, {1.0, 1.0, 2.0, 78}};
    c.algorithm.gradient.p = 1.0;
    c.algorithm.gradient.delta = 1.0;
    c.algorithm.gradient.mu = 2.0;
    c.algorithm.gradient.max_iterations = 100;
    return c;
  }
  throw std::invalid_argument("unknown scenario '" + std::string(name) + "'");
}

void ScenarioConfig::validate() const {
  if (name != "custom" && !is_catalog_scenario(name)) {
    throw std::invalid_argument("unknown scenario '" + name + "'");
  }
  if (length < 2) throw std::invalid_argument("signal length must be at least 2");
  if (output_dir.empty()) throw std::invalid_argument("scenario needs an output directory");
  if (std::isnan(snr_db)) throw std::invalid_argument("snr_db must not be NaN");
  for (double p : p_values) {
    MeasureSpec m;
    m.p = p;
    m.validate();
  }
  switch (algorithm.kind) {
    case AlgorithmKind::Fixed:
    case AlgorithmKind::Adaptive: algorithm.gradient.validate(); break;
    case AlgorithmKind::Scheduled:
      if (algorithm.schedule.empty()) throw std::invalid_argument("schedule must not be empty");
      for (const auto& e : algorithm.schedule) e.validate();
      break;
    case AlgorithmKind::DirectSearch:
      algorithm.direct.measure.validate();
      algorithm.direct.policy.validate();
      if (algorithm.direct.points_per_axis < 2) {
        throw std::invalid_argument("direct search needs at least 2 points per axis");
      }
      if (!(algorithm.direct.range > 0.0)) throw std::invalid_argument("search range must be positive");
      break;
  }
  if ((name == "noisy" || name == "bias-sweep") && trials == 0) {
    throw std::invalid_argument("trials must be positive");
  }
}

ScenarioInstance build_instance(const ScenarioConfig& config, std::size_t trial) {
  const Signal truth = synth_multitone(config.components, config.length);
  const RngSeed mask_seed = derive_seed(config.seed, 2 * trial);
  const RngSeed noise_seed = derive_seed(config.seed, 2 * trial + 1);
  const Signal observed = add_gaussian_noise(truth, config.snr_db, noise_seed);
  switch (config.mask.kind) {
    case MaskKind::None: return {truth, observed, AvailabilityMask::none(config.length)};
    case MaskKind::Random:
      return {truth, observed, make_mask_random(config.length, config.mask.missing_count, mask_seed)};
    case MaskKind::Blocks:
      return {truth, observed,
              make_mask_blocks_random(config.length, config.mask.block_lengths, mask_seed)};
  }
  throw std::invalid_argument("unknown mask kind");
}

ordered_json config_to_json(const ScenarioConfig& config) {
  ordered_json components = ordered_json::array();
  for (const auto& c : config.components) {
    components.push_back({{"amplitude", c.amplitude},
                          {"angular_coefficient", c.angular_coefficient},
                          {"phase", c.phase == PhaseKind::Sin ? "sin" : "cos"}});
  }
  ordered_json schedule = ordered_json::array();
  for (const auto& e : config.algorithm.schedule) {
    schedule.push_back({{"p", e.p}, {"delta", e.delta}, {"mu", e.mu}, {"iterations", e.iterations}});
  }
  const auto& d = config.algorithm.direct;
  return {
      {"name", config.name},
      {"length", config.length},
      {"components", std::move(components)},
      {"mask",
       {{"kind", to_string(config.mask.kind)},
        {"missing_count", config.mask.missing_count},
        {"block_lengths", config.mask.block_lengths}}},
      {"snr_db", number_or_null(config.snr_db)},
      {"algorithm",
       {{"kind", to_string(config.algorithm.kind)},
        {"gradient", gradient_to_json(config.algorithm.gradient)},
        {"schedule", std::move(schedule)},
        {"direct_search",
         {{"measure",
           {{"kind", to_string(d.measure.kind)},
            {"p", d.measure.p},
            {"zero_threshold", d.measure.zero_threshold}}},
          {"range", d.range},
          {"points_per_axis", d.points_per_axis},
          {"rounds", d.policy.rounds},
          {"shrink", to_string(d.policy.shrink)}}}}},
      {"seed", config.seed.value},
      {"trials", config.trials},
      {"p_values", config.p_values},
      {"sweep_counts", config.sweep_counts},
  };
}

ScenarioReport run_scenario(const ScenarioConfig& config) {
  try {
    config.validate();
    if (config.name == "custom" && config.components.empty()) {
      throw std::invalid_argument("custom scenario needs at least one signal component");
    }
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("scenario '" + config.name + "': " + e.what());
  }
  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory '" + config.output_dir.string() +
                             "': " + ec.message());
  }

  ScenarioReport report;
  report.scenario = config.name;
  report.config = config_to_json(config);
  ArtifactWriter writer(config.output_dir, report);
  try {
    const auto& n = config.name;
    if (n == "surface") {
      run_surface(config, writer, report);
    } else if (n == "bias-sweep") {
      run_bias_sweep(config, writer, report);
    } else if (n == "param-study") {
      run_param_study(config, writer, report);
    } else if (n == "adaptive") {
      run_adaptive(config, writer, report);
    } else if (n == "off-grid") {
      run_off_grid(config, writer, report);
    } else if (n == "noisy") {
      run_noisy(config, writer, report);
    } else if (n == "varying-p") {
      run_varying_p(config, writer, report);
    } else {
      run_single(config, writer, report);
    }
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("scenario '" + config.name + "': " + e.what());
  } catch (const DivergenceError& e) {
    throw DivergenceError("scenario '" + config.name + "': " + e.what());
  } catch (const BudgetExceeded& e) {
    throw BudgetExceeded("scenario '" + config.name + "': " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error("scenario '" + config.name + "': " + e.what());
  }
  writer.add("report.json", "scenario report");
  write_report(report, config.output_dir / "report.json");
  return report;
}

ordered_json report_to_json(const ScenarioReport& report) {
  ordered_json manifest = ordered_json::array();
  for (const auto& a : report.manifest) manifest.push_back({{"file", a.file}, {"role", a.role}});
  return {{"scenario", report.scenario},
          {"config", report.config},
          {"manifest", std::move(manifest)},
          {"summary", report.summary}};
}

void write_report(const ScenarioReport& report, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << report_to_json(report).dump(2) << '\n';
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

ScenarioReport read_report(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  ScenarioReport report;
  report.scenario = j.at("scenario").get<std::string>();
  report.config = j.at("config");
  for (const auto& a : j.at("manifest")) {
    report.manifest.push_back({a.at("file").get<std::string>(), a.at("role").get<std::string>()});
  }
  report.summary = j.at("summary");
  return report;
}

}  // namespace sparse_recovery
