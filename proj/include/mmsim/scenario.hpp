#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mmsim/config.hpp"
#include "mmsim/environment.hpp"
#include "mmsim/metrics.hpp"

namespace mmsim {

/// The ten named evaluation scenarios, in catalog order.
std::vector<ScenarioSpec> builtin_scenarios();
/// Built-ins followed by the config's user scenarios. A user scenario may not
/// reuse a built-in name.
std::vector<ScenarioSpec> scenario_catalog(const FullConfig& cfg);
/// Throws ConfigError for an unknown name.
ScenarioSpec find_scenario(const FullConfig& cfg, const std::string& name);

/// Turns a policy source into a policy for a slot of `role`:
///   "fixed:<d_bid>,<d_ask>"   constant quotes
///   "random"                  uniform over the role's action box
///   "benchmark"               the inventory-skewed benchmark quoter
///   "checkpoint:<path>" or a bare path
/// An empty source means `<checkpoint_dir>/<short label>.ckpt`. Learned quoting
/// policies act on their mean; a learned adversary keeps sampling. Throws
/// ConfigError when the source does not fit the slot and CheckpointError when
/// a checkpoint cannot be read.
std::shared_ptr<const Policy> resolve_policy(const std::string& source, Role role,
                                             const FullConfig& cfg,
                                             const std::filesystem::path& checkpoint_dir);

struct ScenarioRunOptions {
  std::uint64_t seed = 0;
  std::optional<std::size_t> episodes;
  std::optional<double> herding_epsilon;
  std::size_t jobs = 1;
  std::filesystem::path checkpoint_dir = "checkpoints";
};

struct PolicyRecord {
  std::string slot;    ///< agent label or "adversary"
  std::string source;  ///< as resolved, after defaults
  std::string description;
};

struct RunManifest {
  std::uint64_t master_seed = 0;
  std::string config_hash;
  std::string code_version;
  std::string scenario;
  std::size_t episodes = 0;
  double herding_epsilon = 0.0;
  std::string checkpoint_dir;
  std::vector<std::uint64_t> episode_seeds;
  std::vector<PolicyRecord> policies;
  std::vector<std::string> outputs;  ///< relative to the run directory
  std::string started_at;            ///< UTC, ISO 8601
  std::string finished_at;
};

std::string manifest_json(const RunManifest& manifest);
RunManifest manifest_from_json(const std::string& text);

struct ScenarioResult {
  std::vector<EpisodeLog> logs;
  MetricReport report;
  RunManifest manifest;
};

/// Per-episode seed of a scenario run.
std::uint64_t episode_seed(std::uint64_t master_seed, std::size_t episode);

/// The environment every episode of the scenario runs in.
EnvironmentSpec scenario_environment(const ScenarioSpec& scenario, const FullConfig& cfg,
                                     const ScenarioRunOptions& options,
                                     std::vector<PolicyRecord>* records = nullptr);

/// Runs the scenario's episodes (on options.jobs threads) and aggregates the
/// metrics. Results do not depend on the number of threads.
ScenarioResult run_scenario(const ScenarioSpec& scenario, const FullConfig& cfg,
                            const ScenarioRunOptions& options);

/// Writes episodes/, report.json, report.txt, config.json and manifest.json
/// into `dir` and records the paths in the manifest.
void write_run(ScenarioResult& result, const FullConfig& cfg, const std::filesystem::path& dir);

/// Re-runs a saved run from its manifest.json and config.json.
ScenarioResult rerun_from_manifest(const std::filesystem::path& manifest_path);

struct ReplayResult {
  MetricReport report;
  std::vector<std::string> warnings;
  /// Largest absolute difference to the stored report.json, when one exists.
  std::optional<double> max_deviation;
  bool matches_stored = true;
};

inline constexpr double kReplayTolerance = 1e-12;

/// Loads a run directory, its episodes/ directory, or a single episode CSV and
/// recomputes the metrics. Checksum mismatches become warnings.
ReplayResult replay(const std::filesystem::path& path);

/// Largest absolute difference between two reports over matching rows. Rows
/// present in only one report count as infinite difference.
double report_deviation(const MetricReport& a, const MetricReport& b);

}  // namespace mmsim
