#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mmsim/episode_log.hpp"
#include "mmsim/market.hpp"
#include "mmsim/policy.hpp"
#include "mmsim/rewards.hpp"

namespace mmsim {

struct EnvironmentConfig {
  MarketParams market;
  RewardConfig rewards;
  double initial_price = 100.0;
  std::int64_t horizon = 1000;
};

/// A quoting participant. A null policy marks the one slot whose actions are
/// supplied to step() from outside (the trainee).
struct AgentSlot {
  Role role = Role::agent_a;
  std::string label;
  std::shared_ptr<const Policy> policy;
  /// Agent whose reward the zero-sum and hybrid roles reference. Defaults to
  /// the other agent when exactly two quoting agents are present.
  std::optional<std::size_t> opponent;
};

struct EnvironmentSpec {
  EnvironmentConfig config;
  std::vector<AgentSlot> agents;
  /// Present: (lambda, sigma) come from this adversary every step; a null
  /// policy makes the adversary the external slot. Absent: fixed market.
  std::optional<std::shared_ptr<const Policy>> adversary;
  /// Present: the non-learned quoter joins the market as an extra participant
  /// labelled "benchmark"; the adversary's reward is measured on its book.
  std::optional<BenchmarkQuoter> benchmark;

  std::string scenario;
  std::vector<std::string> metric_agents;
  double herding_epsilon = 0.05;
  std::string config_hash;
};

struct StepResult {
  StepOutcome outcome;
  std::vector<double> rewards;  ///< per participant, in log order
  double adversary_reward = 0.0;
  std::optional<double> omega;  ///< the external hybrid agent's weight, if any
  bool done = false;
};

/// One episode of the multi-agent market. Owns its random streams: market
/// randomness and policy sampling are drawn from independent streams derived
/// from the reset seed.
class Environment {
 public:
  explicit Environment(EnvironmentSpec spec);

  void reset(std::uint64_t seed, std::size_t episode_index = 0);

  bool done() const noexcept { return state_.finished(); }
  const MarketState& state() const noexcept { return state_; }
  const EnvironmentSpec& spec() const noexcept { return spec_; }

  /// Index of the externally driven quoting agent, if any.
  std::optional<std::size_t> external_agent() const noexcept { return external_agent_; }
  bool adversary_is_external() const noexcept { return adversary_external_; }
  /// Role of whichever slot is external; throws if none is.
  Role external_role() const;
  Observation external_observation() const;

  Observation observe_agent(std::size_t agent) const;
  Observation observe_adversary() const;

  /// Advances one tick. `external` must be given iff an external slot exists.
  StepResult step(const std::optional<Action>& external = std::nullopt);

  const EpisodeLog& log() const noexcept { return log_; }
  EpisodeLog release_log();

 private:
  std::size_t participant_count() const noexcept { return roster_.size(); }

  EnvironmentSpec spec_;
  std::vector<AgentSlot> roster_;  // agents plus the benchmark, if present
  std::optional<std::size_t> external_agent_;
  bool adversary_external_ = false;

  MarketState state_;
  Rng market_rng_{0};
  Rng policy_rng_{0};
  std::vector<double> last_pnl_;
  EpisodeLog log_;
};

}  // namespace mmsim
