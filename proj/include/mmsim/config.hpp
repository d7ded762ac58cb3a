#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mmsim/environment.hpp"
#include "mmsim/policy.hpp"
#include "mmsim/training.hpp"

namespace mmsim {

inline constexpr int kConfigVersion = 1;

struct EvaluationConfig {
  std::size_t episodes = 100;
  double herding_epsilon = 0.05;
  std::uint64_t seed = 20240601;
  std::size_t jobs = 1;
};

/// One quoting participant of a scenario. An empty `policy` falls back to the
/// config's `policies` entry for the role, then to the role's default
/// checkpoint file.
struct RosterEntry {
  Role role = Role::agent_a;
  std::string label;
  std::string policy;
};

enum class MarketMode { fixed, adversarial };

struct ScenarioSpec {
  std::string name;
  std::vector<RosterEntry> roster;
  MarketMode mode = MarketMode::fixed;
  std::string adversary_policy;  ///< empty: config `policies.adversary`
  std::optional<std::size_t> episodes;
  std::optional<std::int64_t> horizon;
  std::vector<std::string> metric_agents;  ///< empty: every roster label
  std::optional<double> herding_epsilon;
};

/// Observation scaling constants; unset entries are derived from the
/// environment (initial price, per-side cap and horizon).
struct ScalingConfig {
  std::optional<double> price_scale;
  std::optional<double> cash_scale;
  std::optional<double> inventory_scale;
};

struct FullConfig {
  EnvironmentConfig environment;
  ScalingConfig scaling;
  BenchmarkQuoter benchmark;
  TrainConfig training;
  EvaluationConfig evaluation;
  /// Role short label ("adversary", "A", "B1", "B2", "BStar") -> policy source.
  std::map<std::string, std::string> policies;
  std::vector<ScenarioSpec> scenarios;

  ObservationScaling observation_scaling() const;
};

/// Parses a JSON document. Omitted keys take their defaults; unknown keys and
/// bound violations raise ConfigError carrying the dotted key path. Empty or
/// whitespace-only text yields the full default configuration.
FullConfig parse_config(const std::string& text);
FullConfig load_config(const std::filesystem::path& path);

/// Canonical JSON of the complete configuration (defaults included).
std::string config_json(const FullConfig& cfg);
/// FNV-1a of config_json, as 16 hex digits.
std::string config_hash(const FullConfig& cfg);

}  // namespace mmsim
