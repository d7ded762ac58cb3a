#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mmsim/policy.hpp"

namespace mmsim {

inline constexpr int kEpisodeSchemaVersion = 1;

struct AgentStep {
  double d_bid = 0.0;
  double d_ask = 0.0;
  double q_bid = 0.0;
  double q_ask = 0.0;
  std::int64_t bid_fills = 0;
  std::int64_t ask_fills = 0;
  std::int64_t inventory = 0;  ///< after this step's fills
  double cash = 0.0;           ///< after this step's fills
  double reward = 0.0;
  double omega = 0.0;          ///< NaN for agents without a modulation weight

  std::int64_t fills() const noexcept { return bid_fills + ask_fills; }
  friend bool operator==(const AgentStep&, const AgentStep&) = default;
};

/// One tick. `mid_price` is the post-move price P_{t+1} used to mark the
/// books; quotes were placed against the previous step's mid.
struct StepRecord {
  std::int64_t step = 0;
  double mid_price = 0.0;
  double lambda_rate = 0.0;
  double sigma = 0.0;
  std::int64_t n_arrivals = 0;
  std::int64_t buys = 0;
  std::int64_t sells = 0;
  std::vector<AgentStep> agents;
};

struct AgentInfo {
  std::string label;
  Role role = Role::agent_a;

  friend bool operator==(const AgentInfo&, const AgentInfo&) = default;
};

struct EpisodeMetadata {
  std::string scenario;
  std::size_t episode_index = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
  double initial_price = 100.0;
  std::int64_t horizon = 0;
  /// Agents whose metrics are reported (one or two labels).
  std::vector<std::string> metric_agents;
  double herding_epsilon = 0.05;
  /// Steps that ended with a non-positive mid-price (not floored).
  std::int64_t nonpositive_price_steps = 0;
};

struct EpisodeLog {
  EpisodeMetadata meta;
  std::vector<AgentInfo> agents;
  std::vector<StepRecord> steps;

  /// Throws ContractViolation for an unknown label.
  std::size_t agent_index(const std::string& label) const;
  std::vector<std::size_t> metric_agent_indices() const;
};

/// CSV: a schema comment line, a header row, then one row per step in a fixed
/// column order (per-agent column groups follow the global columns). Every
/// double uses its shortest round-trip representation.
void write_episode_csv(std::ostream& out, const EpisodeLog& log);
std::string episode_csv(const EpisodeLog& log);

/// Checksum over the canonical CSV serialization.
std::string episode_checksum(const EpisodeLog& log);

/// JSON sidecar with metadata, agent roster, row count and checksum.
std::string episode_sidecar_json(const EpisodeLog& log);

struct LoadedEpisode {
  EpisodeLog log;
  bool checksum_ok = true;
  std::string stored_checksum;
};

/// Reads a CSV + sidecar pair written by save_episode. Truncated or malformed
/// files raise CorruptLogError; an unknown schema raises SchemaVersionError; a
/// checksum mismatch is reported through `checksum_ok`.
LoadedEpisode load_episode(const std::filesystem::path& csv_path);

/// Writes `<stem>.csv` and `<stem>.json` into `dir`; returns the CSV path.
std::filesystem::path save_episode(const std::filesystem::path& dir, const std::string& stem,
                                   const EpisodeLog& log);

}  // namespace mmsim
