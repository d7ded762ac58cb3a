#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mmsim/market.hpp"
#include "mmsim/network.hpp"
#include "mmsim/random.hpp"

namespace mmsim {

enum class Role {
  adversary,    ///< controls lambda and sigma, never trades
  agent_a,      ///< self-interested, trained against the adversary
  agent_b1,     ///< self-interested, trained against a frozen A
  agent_b2,     ///< zero-sum against its opponent
  agent_bstar,  ///< hybrid, emits a modulation weight omega
  benchmark,    ///< fixed linear quoting rule inside the adversary's environment
};

std::string_view to_string(Role role) noexcept;
/// Accepts the canonical names plus short aliases ("A", "B1", "B2", "BStar").
Role role_from_string(std::string_view name);
/// Short label used in reports: "A", "B1", "B2", "BStar", "adversary", "benchmark".
std::string_view short_label(Role role) noexcept;

enum class ActionKind { quotes, quotes_with_omega, market_control };

ActionKind action_kind(Role role) noexcept;
std::string_view to_string(ActionKind kind) noexcept;

/// What one agent sees. Quoting roles see their own inventory and cash; the
/// adversary sees only price and time.
struct PrivateState {
  std::int64_t inventory = 0;
  double cash = 0.0;
};

struct Observation {
  double mid_price = 0.0;
  double time_frac = 0.0;
  std::optional<PrivateState> own;
};

/// Builds the observation for `agent` (an index into state.accounts). The
/// adversary ignores `agent`.
Observation observe(const MarketState& state, std::size_t agent, Role role);

/// Flat key/value view of an observation, e.g. for logging.
std::vector<std::pair<std::string, double>> observation_fields(const Observation& obs);

struct ObservationScaling {
  double price_scale = 100.0;
  double cash_scale = 100.0;
  double inventory_scale = 158.11388300841898;  // cap * sqrt(T) at the defaults

  friend bool operator==(const ObservationScaling&, const ObservationScaling&) = default;
};

std::size_t observation_dim(Role role) noexcept;
std::vector<double> observation_features(const Observation& obs, const ObservationScaling& scaling);

struct QuoteAction {
  QuotePair quotes;
  std::optional<double> omega;  ///< only for the hybrid agent
};

struct MarketControl {
  double lambda_rate = 0.0;
  double sigma = 0.0;
};

using Action = std::variant<QuoteAction, MarketControl>;

/// Per-dimension closed boxes for a role's action.
struct ActionSpace {
  ActionKind kind = ActionKind::quotes;
  std::vector<Interval> bounds;

  std::size_t dim() const noexcept { return bounds.size(); }
};

ActionSpace action_space_for(Role role, const MarketParams& params);

/// Maps a pre-squash vector into the box: low + width * sigmoid(u), then clamp.
std::vector<double> squash_action(const ActionSpace& space, std::span<const double> raw);
Action decode_action(const ActionSpace& space, std::span<const double> squashed);

/// Inventory-skewed symmetric quoting:
///   d_bid = clamp(c + k I), d_ask = clamp(c - k I)
/// so a long book widens its bid and tightens its ask.
struct BenchmarkQuoter {
  double base_offset = 2.0;
  double inventory_skew = 0.05;

  QuotePair quote(std::int64_t inventory, double d_max) const noexcept;
};

/// Weights of a learned policy together with everything needed to run it
/// outside the trainer.
struct PolicyParams {
  Role role = Role::agent_a;
  ActionSpace action_space;
  ObservationScaling scaling;
  ActorCritic network;
  std::string config_hash;
  std::string optimizer;
};

/// Fresh policy for `role`. The actor output bias (omega included) is zero.
PolicyParams make_policy_params(Role role, const MarketParams& params,
                                const ObservationScaling& scaling,
                                const std::vector<std::size_t>& hidden, Rng& rng,
                                double initial_log_std = 0.0);

struct PolicySample {
  std::vector<double> raw;       ///< pre-squash Gaussian sample (or mean)
  std::vector<double> squashed;  ///< inside the action box
  double log_prob = 0.0;         ///< of `raw` under the diagonal Gaussian
  double value = 0.0;
  Action action;
};

double gaussian_log_prob(std::span<const double> x, std::span<const double> mean,
                         std::span<const double> log_std) noexcept;

/// Samples (or, when deterministic, takes the mean of) the policy's Gaussian in
/// pre-squash space and maps it into the action box. Throws NumericalFault on
/// non-finite network output.
PolicySample sample_policy(const PolicyParams& params, std::span<const double> features, Rng& rng,
                           bool deterministic);

Action act_policy(const PolicyParams& params, const Observation& obs, Rng& rng,
                  bool deterministic);

/// Anything that can choose an action from an observation.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual ActionKind kind() const noexcept = 0;
  virtual Action act(const Observation& obs, Rng& rng) const = 0;
  virtual std::string describe() const = 0;
};

class FixedOffsetPolicy final : public Policy {
 public:
  FixedOffsetPolicy(QuotePair quotes, double d_max);

  ActionKind kind() const noexcept override { return ActionKind::quotes; }
  Action act(const Observation&, Rng&) const override { return QuoteAction{quotes_, {}}; }
  std::string describe() const override;

 private:
  QuotePair quotes_;
};

/// Uniform over the action box; the training control baseline.
class RandomUniformPolicy final : public Policy {
 public:
  explicit RandomUniformPolicy(ActionSpace space) : space_(std::move(space)) {}

  ActionKind kind() const noexcept override { return space_.kind; }
  Action act(const Observation& obs, Rng& rng) const override;
  std::string describe() const override { return "random"; }

 private:
  ActionSpace space_;
};

class BenchmarkPolicy final : public Policy {
 public:
  BenchmarkPolicy(BenchmarkQuoter quoter, double d_max) : quoter_(quoter), d_max_(d_max) {}

  ActionKind kind() const noexcept override { return ActionKind::quotes; }
  Action act(const Observation& obs, Rng& rng) const override;
  std::string describe() const override { return "benchmark"; }

 private:
  BenchmarkQuoter quoter_;
  double d_max_;
};

class LearnedPolicy final : public Policy {
 public:
  LearnedPolicy(std::shared_ptr<const PolicyParams> params, bool deterministic)
      : params_(std::move(params)), deterministic_(deterministic) {}

  ActionKind kind() const noexcept override { return params_->action_space.kind; }
  Action act(const Observation& obs, Rng& rng) const override {
    return act_policy(*params_, obs, rng, deterministic_);
  }
  std::string describe() const override;
  const PolicyParams& params() const noexcept { return *params_; }

 private:
  std::shared_ptr<const PolicyParams> params_;
  bool deterministic_;
};

/// The scripted constant-quote policy.
std::shared_ptr<const Policy> scripted_fixed_offset(double d_bid, double d_ask, double d_max);

}  // namespace mmsim
