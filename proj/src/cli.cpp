#include "sparse_recovery/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "sparse_recovery/direct_search.hpp"
#include "sparse_recovery/experiments.hpp"
#include "sparse_recovery/gradient_recovery.hpp"
#include "sparse_recovery/io.hpp"
#include "sparse_recovery/measures.hpp"

namespace sparse_recovery {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr const char* kProgram = "sparse-recover";

// Same rendering CLI11 uses for captured defaults.
template <typename T>
std::string default_text(const T& value) {
  std::ostringstream s;
  s << value;
  return s.str();
}

struct ReconstructArgs {
  fs::path input, mask, truth, out;
  std::string mode = "adaptive";
  std::string schedule;
  std::string probe = "incremental";
  GradientParams params;
  std::uint64_t seed = RngSeed{}.value;
  unsigned workers = 1;
  bool verbose = false;
};

struct DirectSearchArgs {
  fs::path input, mask, out;
  MeasureSpec measure;
  std::string kind = std::string(to_string(MeasureSpec{}.kind));
  double range = DirectSearchConfig{}.range;
  std::size_t points = DirectSearchConfig{}.points_per_axis;
  RefinePolicy policy;
  std::string shrink = std::string(to_string(RefinePolicy{}.shrink));
  std::uint64_t budget = SearchOptions{}.evaluation_budget;
  unsigned workers = 1;
};

struct MeasureArgs {
  fs::path input;
  MeasureSpec measure;
  std::string kind = std::string(to_string(MeasureSpec{}.kind));
};

struct SurfaceArgs {
  fs::path input, mask, out;
  double range = DirectSearchConfig{}.range;
  double step = 0.01;
  double p = MeasureSpec{}.p;
  unsigned workers = 1;
};

struct ScenarioArgs {
  std::string name;
  std::uint64_t seed = RngSeed{}.value;
  fs::path out;
  double snr_db = kNoiseDisabled;
  std::size_t trials = ScenarioConfig{}.trials;
};

std::vector<ScheduleEntry> parse_schedule(const std::string& text) {
  ordered_json j;
  try {
    if (!text.empty() && (text.front() == '[' || text.front() == '{')) {
      j = ordered_json::parse(text);
    } else {
      std::ifstream in(text);
      if (!in) throw std::invalid_argument("cannot open schedule file '" + text + "'");
      j = ordered_json::parse(in);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("schedule is not valid JSON: ") + e.what());
  }
  if (!j.is_array() || j.empty()) {
    throw std::invalid_argument("schedule must be a non-empty JSON array");
  }
  std::vector<ScheduleEntry> schedule;
  try {
    for (const auto& e : j) {
      ScheduleEntry entry{e.at("p").get<double>(), e.at("delta").get<double>(),
                          e.at("mu").get<double>(), e.at("iterations").get<std::size_t>()};
      entry.validate();
      schedule.push_back(entry);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("schedule entry needs p, delta, mu, iterations: ") +
                                e.what());
  }
  return schedule;
}

void prepare_out(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + dir.string() + "': " + ec.message());
}

Signal read_input(const fs::path& path) {
  try {
    return read_signal_csv(path);
  } catch (const std::runtime_error& e) {
    throw std::invalid_argument(e.what());
  }
}

AvailabilityMask read_mask(const fs::path& path, std::size_t length) {
  try {
    return read_mask_csv(path, length);
  } catch (const std::runtime_error& e) {
    throw std::invalid_argument(e.what());
  }
}

int do_reconstruct(const ReconstructArgs& a, std::ostream& out) {
  const Signal observed = read_input(a.input);
  const AvailabilityMask mask = read_mask(a.mask, observed.size());
  RecoveryOptions options;
  options.workers = a.workers;
  if (a.probe == "full") options.probe_mode = ProbeMode::Full;
  if (!a.truth.empty()) {
    options.truth = read_input(a.truth);
    if (options.truth->size() != observed.size()) {
      throw std::invalid_argument("truth signal length does not match the input");
    }
  }
  if (a.verbose) {
    options.on_iteration = [&out](const IterationRecord& r, std::span<const double>) {
      out << "iter " << r.k << " measure=" << format_number(r.measure)
          << " delta=" << format_number(r.delta) << " mu=" << format_number(r.mu) << '\n';
    };
  }

  std::optional<RecoveryResult> result;
  ordered_json params;
  if (a.mode == "scheduled") {
    if (a.schedule.empty()) throw std::invalid_argument("--mode scheduled needs --schedule");
    const auto schedule = parse_schedule(a.schedule);
    params = ordered_json::array();
    for (const auto& e : schedule) {
      params.push_back({{"p", e.p}, {"delta", e.delta}, {"mu", e.mu}, {"iterations", e.iterations}});
    }
    result = reconstruct_scheduled(observed, mask, schedule, options);
  } else {
    const auto& g = a.params;
    params = {{"delta", g.delta}, {"mu", g.mu}, {"p", g.p}, {"P", g.reduction_threshold},
              {"reduction_factor", g.reduction_factor}, {"max_iterations", g.max_iterations},
              {"target_delta", g.target_delta}};
    result = a.mode == "fixed" ? reconstruct_fixed(observed, mask, g, options)
                               : reconstruct_adaptive(observed, mask, g, options);
  }

  prepare_out(a.out);
  ScenarioReport report;
  report.scenario = "reconstruct";
  report.config = {{"input", a.input.filename().string()},
                   {"mask", a.mask.filename().string()},
                   {"mode", a.mode},
                   {"probe", a.probe},
                   {"seed", a.seed},
                   {"parameters", std::move(params)}};
  write_signal_csv(a.out / "signal_reconstructed.csv", result->signal);
  report.manifest.push_back({"signal_reconstructed.csv", "reconstructed signal"});
  write_trace_csv(a.out / "trace.csv", result->trace);
  report.manifest.push_back({"trace.csv", "reconstruction trace"});
  const auto& last = result->trace.records.back();
  auto& s = report.summary;
  s["missing"] = mask.missing_count();
  s["iterations"] = result->trace.records.size();
  s["reductions"] = result->trace.events.size();
  s["initial_measure"] = result->trace.initial_measure;
  s["final_measure"] = last.measure;
  s["final_delta"] = last.delta;
  if (options.truth) {
    s["zero_fill_mae"] = mae(*options.truth, zero_fill(observed, mask));
    s["final_mae"] = mae(*options.truth, result->signal);
  }
  report.manifest.push_back({"report.json", "run report"});
  write_report(report, a.out / "report.json");
  out << "iterations " << result->trace.records.size() << ", final measure "
      << format_number(last.measure) << '\n';
  return 0;
}

int do_direct_search(DirectSearchArgs a, std::ostream& out) {
  const Signal observed = read_input(a.input);
  const AvailabilityMask mask = read_mask(a.mask, observed.size());
  a.measure.kind = parse_measure_kind(a.kind);
  a.policy.shrink = parse_shrink_mode(a.shrink);
  const SearchOptions options{a.budget, a.workers};
  const auto result = refine_search(observed, mask, a.measure, a.range, a.points, a.policy,
                                    options);
  prepare_out(a.out);
  const Signal filled = fill_missing(observed, mask, result.values);
  write_signal_csv(a.out / "signal_reconstructed.csv", filled);
  {
    std::ofstream rounds(a.out / "refine_rounds.csv", std::ios::binary | std::ios::trunc);
    rounds << "round,half_width,step,measure\n";
    for (std::size_t r = 0; r < result.rounds.size(); ++r) {
      const auto& rr = result.rounds[r];
      rounds << r + 1 << ',' << format_number(rr.half_width) << ',' << format_number(rr.step) << ','
             << format_number(rr.measure_value) << '\n';
    }
    if (!rounds) throw std::runtime_error("write to refine_rounds.csv failed");
  }
  ScenarioReport report;
  report.scenario = "direct-search";
  report.config = {{"input", a.input.filename().string()},
                   {"mask", a.mask.filename().string()},
                   {"kind", a.kind},
                   {"p", a.measure.p},
                   {"threshold", a.measure.zero_threshold},
                   {"range", a.range},
                   {"points", a.points},
                   {"rounds", a.policy.rounds},
                   {"shrink", a.shrink},
                   {"budget", a.budget}};
  report.manifest = {{"signal_reconstructed.csv", "signal with the searched values filled in"},
                     {"refine_rounds.csv", "per-round grid and measure"},
                     {"report.json", "run report"}};
  report.summary = {{"values", result.values},
                    {"accuracy_bound", result.accuracy_bound},
                    {"evaluations", result.evaluations},
                    {"final_measure", result.rounds.back().measure_value}};
  write_report(report, a.out / "report.json");
  for (std::size_t i = 0; i < result.values.size(); ++i) {
    out << mask.missing()[i] << ' ' << format_number(result.values[i]) << '\n';
  }
  return 0;
}

int do_measure(MeasureArgs a, std::ostream& out) {
  const Signal x = read_input(a.input);
  a.measure.kind = parse_measure_kind(a.kind);
  a.measure.validate();
  const Spectrum X = dft_forward(x);
  out << format_number(evaluate_measure(a.measure, X.coefficients())) << '\n';
  return 0;
}

int do_surface(const SurfaceArgs& a, std::ostream& out) {
  const Signal observed = read_input(a.input);
  const AvailabilityMask mask = read_mask(a.mask, observed.size());
  SearchOptions options;
  options.workers = a.workers;
  const auto surface = measure_surface(observed, mask, a.range, a.step, a.p, options);
  prepare_out(a.out);
  write_surface_csv(a.out / "surface.csv", surface);
  const auto [i, j] = surface.argmin();
  out << "argmin " << format_number(surface.axis[i]) << ' ' << format_number(surface.axis[j])
      << " measure " << format_number(surface.at(i, j)) << '\n';
  return 0;
}

int do_scenario(const ScenarioArgs& a, bool seed_given, bool snr_given, bool trials_given,
                std::ostream& out) {
  if (!is_catalog_scenario(a.name)) {
    throw std::invalid_argument("unknown scenario '" + a.name + "' (see list-scenarios)");
  }
  ScenarioConfig config = default_scenario_config(a.name);
  config.seed.value = a.seed;
  if (!seed_given) {
    if (const char* env = std::getenv(kSeedEnvironmentVariable)) {
      try {
        std::size_t used = 0;
        config.seed.value = std::stoull(env, &used);
        if (used != std::string(env).size()) throw std::invalid_argument(env);
      } catch (const std::exception&) {
        throw std::invalid_argument(std::string(kSeedEnvironmentVariable) +
                                    " must be an unsigned integer");
      }
    }
  }
  if (snr_given) config.snr_db = a.snr_db;
  if (trials_given) config.trials = a.trials;
  config.output_dir = a.out;
  const auto report = run_scenario(config);
  out << report.scenario << ": " << report.manifest.size() << " artifacts in " << a.out.string()
      << '\n';
  return 0;
}

template <typename T>
CLI::Option* with_default(CLI::App* app, const std::string& name, T& value,
                          const std::string& description) {
  return app->add_option(name, value, description)->capture_default_str();
}

}  // namespace

std::map<std::string, std::map<std::string, std::string>> cli_default_manifest() {
  const GradientParams g;
  const DirectSearchConfig d;
  const RefinePolicy rp;
  const MeasureSpec m;
  const SearchOptions so;
  const ScenarioConfig sc;
  return {
      {"reconstruct",
       {{"--mode", "adaptive"},
        {"--delta", default_text(g.delta)},
        {"--mu", default_text(g.mu)},
        {"--p", default_text(g.p)},
        {"--P", default_text(g.reduction_threshold)},
        {"--factor", default_text(g.reduction_factor)},
        {"--max-iters", default_text(g.max_iterations)},
        {"--target-delta", default_text(g.target_delta)},
        {"--seed", default_text(RngSeed{}.value)},
        {"--probe", "incremental"},
        {"--workers", default_text(RecoveryOptions{}.workers)}}},
      {"direct-search",
       {{"--kind", std::string(to_string(m.kind))},
        {"--p", default_text(m.p)},
        {"--threshold", default_text(m.zero_threshold)},
        {"--range", default_text(d.range)},
        {"--points", default_text(d.points_per_axis)},
        {"--rounds", default_text(rp.rounds)},
        {"--shrink", std::string(to_string(rp.shrink))},
        {"--max-rounds", default_text(rp.max_rounds)},
        {"--budget", default_text(so.evaluation_budget)},
        {"--workers", default_text(so.workers)}}},
      {"measure",
       {{"--kind", std::string(to_string(m.kind))},
        {"--p", default_text(m.p)},
        {"--threshold", default_text(m.zero_threshold)}}},
      {"surface",
       {{"--range", default_text(d.range)},
        {"--step", default_text(0.01)},
        {"--p", default_text(m.p)},
        {"--workers", default_text(so.workers)}}},
      {"scenario", {{"--seed", default_text(sc.seed.value)}, {"--trials", default_text(sc.trials)}}},
  };
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Recovery of missing samples of transform-sparse signals", kProgram};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  const std::vector<std::string> measure_kinds = {"lp", "ratio42", "norm0"};

  // reconstruct
  ReconstructArgs ra;
  auto* rec = app.add_subcommand("reconstruct", "Gradient reconstruction of missing samples");
  rec->add_option("--input", ra.input, "Signal CSV (index,value); missing entries are ignored")
      ->required();
  rec->add_option("--mask", ra.mask, "Mask CSV listing missing indices")->required();
  rec->add_option("--out", ra.out, "Output directory")->required();
  with_default(rec, "--mode", ra.mode, "Step-size control")
      ->check(CLI::IsMember({"fixed", "adaptive", "scheduled"}));
  with_default(rec, "--delta", ra.params.delta, "Probe amplitude");
  with_default(rec, "--mu", ra.params.mu, "Correction step");
  with_default(rec, "--p", ra.params.p, "Measure parameter (exponent 1/p)");
  with_default(rec, "--P", ra.params.reduction_threshold,
               "Reduction threshold, 0 disables reduction (adaptive)");
  with_default(rec, "--factor", ra.params.reduction_factor, "Reduction factor (adaptive)");
  with_default(rec, "--max-iters", ra.params.max_iterations, "Iteration limit");
  with_default(rec, "--target-delta", ra.params.target_delta,
               "Stop once delta falls below this (adaptive)");
  rec->add_option("--schedule", ra.schedule,
                  "JSON array (inline or file) of {p, delta, mu, iterations} for --mode scheduled");
  rec->add_option("--truth", ra.truth, "Reference signal CSV; adds MAE to the trace");
  with_default(rec, "--seed", ra.seed, "Recorded in the report; reconstruction is deterministic");
  with_default(rec, "--probe", ra.probe, "Probe evaluation")
      ->check(CLI::IsMember({"incremental", "full"}));
  with_default(rec, "--workers", ra.workers, "Threads per gradient estimate");
  rec->add_flag("--verbose", ra.verbose, "Print one line per iteration");

  // direct-search
  DirectSearchArgs da;
  auto* ds = app.add_subcommand("direct-search", "Exhaustive grid search with refinement");
  ds->add_option("--input", da.input, "Signal CSV")->required();
  ds->add_option("--mask", da.mask, "Mask CSV listing missing indices")->required();
  ds->add_option("--out", da.out, "Output directory")->required();
  with_default(ds, "--kind", da.kind, "Measure")->check(CLI::IsMember(measure_kinds));
  with_default(ds, "--p", da.measure.p, "lp measure parameter");
  with_default(ds, "--threshold", da.measure.zero_threshold, "norm0 magnitude threshold");
  with_default(ds, "--range", da.range, "Initial half width A; the first grid spans -A..A");
  with_default(ds, "--points", da.points, "Grid points per axis L");
  with_default(ds, "--rounds", da.policy.rounds, "Refinement rounds");
  with_default(ds, "--shrink", da.shrink, "Half width after each round")
      ->check(CLI::IsMember({"cell", "half-cell"}));
  with_default(ds, "--max-rounds", da.policy.max_rounds, "Upper limit on --rounds");
  with_default(ds, "--budget", da.budget, "Maximum measure evaluations");
  with_default(ds, "--workers", da.workers, "Threads per grid round");

  // measure
  MeasureArgs ma;
  auto* me = app.add_subcommand("measure", "Concentration measure of a signal's DFT");
  me->add_option("--input", ma.input, "Signal CSV")->required();
  with_default(me, "--kind", ma.kind, "Measure")->check(CLI::IsMember(measure_kinds));
  with_default(me, "--p", ma.measure.p, "lp measure parameter");
  with_default(me, "--threshold", ma.measure.zero_threshold, "norm0 magnitude threshold");

  // surface
  SurfaceArgs sa;
  auto* su = app.add_subcommand("surface", "lp measure over a grid of two missing samples");
  su->add_option("--input", sa.input, "Signal CSV")->required();
  su->add_option("--mask", sa.mask, "Mask CSV with exactly two missing indices")->required();
  su->add_option("--out", sa.out, "Output directory (writes surface.csv)")->required();
  with_default(su, "--range", sa.range, "Grid covers -range..range on both axes");
  with_default(su, "--step", sa.step, "Grid step");
  with_default(su, "--p", sa.p, "lp measure parameter");
  with_default(su, "--workers", sa.workers, "Threads");

  // scenario
  ScenarioArgs sca;
  auto* sc = app.add_subcommand("scenario", "Run a catalog experiment");
  sc->add_option("--name", sca.name, "Catalog name (see list-scenarios)")->required();
  auto* seed_opt = with_default(sc, "--seed", sca.seed,
                                std::string("Seed; falls back to ") + kSeedEnvironmentVariable);
  sc->add_option("--out", sca.out, "Output directory")->required();
  auto* snr_opt =
      sc->add_option("--snr-db", sca.snr_db, "Input SNR in dB (default: the scenario's own)");
  auto* trials_opt = with_default(sc, "--trials", sca.trials, "Monte-Carlo trials (noisy, bias-sweep)");

  auto* ls = app.add_subcommand("list-scenarios", "Print the catalog names");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    err << "usage: " << kProgram << " <subcommand> [OPTIONS]; see " << kProgram
        << " <subcommand> --help\n";
    return 1;
  }

  try {
    if (rec->parsed()) return do_reconstruct(ra, out);
    if (ds->parsed()) return do_direct_search(da, out);
    if (me->parsed()) return do_measure(ma, out);
    if (su->parsed()) return do_surface(sa, out);
    if (sc->parsed()) {
      return do_scenario(sca, seed_opt->count() > 0, snr_opt->count() > 0, trials_opt->count() > 0,
                         out);
    }
    if (ls->parsed()) {
      for (auto name : scenario_catalog()) out << name << '\n';
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    const auto* sub = app.get_subcommands().front();
    err << "error: " << e.what() << '\n';
    err << "usage: " << kProgram << ' ' << sub->get_name() << " [OPTIONS]; see " << kProgram << ' '
        << sub->get_name() << " --help\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace sparse_recovery
