#ifndef SPARSE_RECOVERY_EXPERIMENTS_HPP
#define SPARSE_RECOVERY_EXPERIMENTS_HPP

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sparse_recovery/direct_search.hpp"
#include "sparse_recovery/gradient_recovery.hpp"
#include "sparse_recovery/measures.hpp"
#include "sparse_recovery/rng.hpp"
#include "sparse_recovery/signal_model.hpp"

namespace sparse_recovery {

enum class MaskKind { None, Random, Blocks };

struct MaskConfig {
  MaskKind kind = MaskKind::Random;
  std::size_t missing_count = 0;            ///< Random
  std::vector<std::size_t> block_lengths;   ///< Blocks, randomly placed
};

enum class AlgorithmKind { Fixed, Adaptive, Scheduled, DirectSearch };

std::string_view to_string(AlgorithmKind kind);

struct DirectSearchConfig {
  MeasureSpec measure;
  double range = 5.0;
  std::size_t points_per_axis = 5;
  RefinePolicy policy{15, ShrinkMode::Cell, 20};
};

struct AlgorithmConfig {
  AlgorithmKind kind = AlgorithmKind::Adaptive;
  GradientParams gradient;
  std::vector<ScheduleEntry> schedule;
  DirectSearchConfig direct;
};

/// Everything a scenario run depends on. Catalog scenarios start from
/// default_scenario_config(name); "custom" runs a single reconstruction
/// described entirely by the fields below.
struct ScenarioConfig {
  std::string name = "custom";
  std::vector<ToneComponent> components;
  std::size_t length = 256;
  MaskConfig mask;
  double snr_db = kNoiseDisabled;
  AlgorithmConfig algorithm;
  RngSeed seed;
  /// Monte-Carlo repetitions (noisy, bias-sweep).
  std::size_t trials = 10;
  /// lp parameters swept by surface and bias-sweep.
  std::vector<double> p_values;
  /// Omitted-sample counts swept by noisy.
  std::vector<std::size_t> sweep_counts;
  std::filesystem::path output_dir;

  void validate() const;
};

/// Catalog names in listing order.
std::span<const std::string_view> scenario_catalog();

bool is_catalog_scenario(std::string_view name);

/// Catalog defaults for `name` ("custom" gives an empty template). Throws
/// std::invalid_argument for unknown names.
ScenarioConfig default_scenario_config(std::string_view name);

/// One seeded problem instance of a config.
struct ScenarioInstance {
  Signal truth;
  Signal observed;  ///< truth plus noise (if any), before masking
  AvailabilityMask mask;
};

/// Trial t draws its mask from derive_seed(seed, 2t) and its noise from
/// derive_seed(seed, 2t + 1).
ScenarioInstance build_instance(const ScenarioConfig& config, std::size_t trial = 0);

struct ArtifactEntry {
  std::string file;
  std::string role;
};

struct ScenarioReport {
  std::string scenario;
  nlohmann::ordered_json config;
  std::vector<ArtifactEntry> manifest;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
};

/// Config echo; the output directory is left out so reports from the same
/// config and seed are identical wherever they are written.
nlohmann::ordered_json config_to_json(const ScenarioConfig& config);

/// Runs the scenario, writes its artifacts and report.json into
/// config.output_dir (created if needed) and returns the report.
ScenarioReport run_scenario(const ScenarioConfig& config);

nlohmann::ordered_json report_to_json(const ScenarioReport& report);

/// Writes report_to_json(report) with two-space indentation.
void write_report(const ScenarioReport& report, const std::filesystem::path& path);

ScenarioReport read_report(const std::filesystem::path& path);

}  // namespace sparse_recovery

#endif  // SPARSE_RECOVERY_EXPERIMENTS_HPP
