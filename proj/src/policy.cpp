#include "mmsim/policy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mmsim/errors.hpp"

namespace mmsim {
namespace {

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

struct RoleName {
  Role role;
  std::string_view name;
  std::string_view label;
};

constexpr std::array<RoleName, 6> kRoles{{
    {Role::adversary, "adversary", "adversary"},
    {Role::agent_a, "agent_a", "A"},
    {Role::agent_b1, "agent_b1", "B1"},
    {Role::agent_b2, "agent_b2", "B2"},
    {Role::agent_bstar, "agent_bstar", "BStar"},
    {Role::benchmark, "benchmark", "benchmark"},
}};

}  // namespace

std::string_view to_string(Role role) noexcept {
  for (const auto& r : kRoles) {
    if (r.role == role) return r.name;
  }
  return "unknown";
}

std::string_view short_label(Role role) noexcept {
  for (const auto& r : kRoles) {
    if (r.role == role) return r.label;
  }
  return "unknown";
}

Role role_from_string(std::string_view name) {
  for (const auto& r : kRoles) {
    if (r.name == name || r.label == name) return r.role;
  }
  if (name == "B*" || name == "Bstar" || name == "bstar") return Role::agent_bstar;
  throw ConfigError("role", "unknown role '" + std::string(name) + "'");
}

ActionKind action_kind(Role role) noexcept {
  switch (role) {
    case Role::adversary:
      return ActionKind::market_control;
    case Role::agent_bstar:
      return ActionKind::quotes_with_omega;
    default:
      return ActionKind::quotes;
  }
}

std::string_view to_string(ActionKind kind) noexcept {
  switch (kind) {
    case ActionKind::quotes:
      return "quotes";
    case ActionKind::quotes_with_omega:
      return "quotes_with_omega";
    case ActionKind::market_control:
      return "market_control";
  }
  return "unknown";
}

Observation observe(const MarketState& state, std::size_t agent, Role role) {
  Observation obs{state.mid_price, state.time_fraction(), std::nullopt};
  if (role == Role::adversary) return obs;
  if (agent >= state.accounts.size()) {
    throw ContractViolation("observe: agent " + std::to_string(agent) + " is not registered");
  }
  const Account& account = state.accounts[agent];
  obs.own = PrivateState{account.inventory, account.cash};
  return obs;
}

std::vector<std::pair<std::string, double>> observation_fields(const Observation& obs) {
  std::vector<std::pair<std::string, double>> fields{{"mid_price", obs.mid_price},
                                                     {"time_frac", obs.time_frac}};
  if (obs.own) {
    fields.emplace_back("inventory", static_cast<double>(obs.own->inventory));
    fields.emplace_back("cash", obs.own->cash);
  }
  return fields;
}

std::size_t observation_dim(Role role) noexcept { return role == Role::adversary ? 2 : 4; }

std::vector<double> observation_features(const Observation& obs,
                                         const ObservationScaling& scaling) {
  std::vector<double> x{obs.mid_price / scaling.price_scale, obs.time_frac};
  if (obs.own) {
    x.push_back(static_cast<double>(obs.own->inventory) / scaling.inventory_scale);
    x.push_back(obs.own->cash / scaling.cash_scale);
  }
  return x;
}

ActionSpace action_space_for(Role role, const MarketParams& params) {
  const Interval offset{0.0, params.d_max};
  switch (action_kind(role)) {
    case ActionKind::market_control:
      return {ActionKind::market_control, {params.lambda_bounds, params.sigma_bounds}};
    case ActionKind::quotes_with_omega:
      return {ActionKind::quotes_with_omega, {offset, offset, Interval{0.0, 1.0}}};
    case ActionKind::quotes:
      break;
  }
  return {ActionKind::quotes, {offset, offset}};
}

std::vector<double> squash_action(const ActionSpace& space, std::span<const double> raw) {
  if (raw.size() != space.dim()) throw ContractViolation("action dimensionality mismatch");
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const Interval& box = space.bounds[i];
    out[i] = box.clamp(box.low + box.width() * sigmoid(raw[i]));
  }
  return out;
}

Action decode_action(const ActionSpace& space, std::span<const double> squashed) {
  if (squashed.size() != space.dim()) throw ContractViolation("action dimensionality mismatch");
  switch (space.kind) {
    case ActionKind::market_control:
      return MarketControl{squashed[0], squashed[1]};
    case ActionKind::quotes_with_omega:
      return QuoteAction{QuotePair{squashed[0], squashed[1]}, squashed[2]};
    case ActionKind::quotes:
      break;
  }
  return QuoteAction{QuotePair{squashed[0], squashed[1]}, std::nullopt};
}

QuotePair BenchmarkQuoter::quote(std::int64_t inventory, double d_max) const noexcept {
  const double skew = inventory_skew * static_cast<double>(inventory);
  return {std::clamp(base_offset + skew, 0.0, d_max), std::clamp(base_offset - skew, 0.0, d_max)};
}

PolicyParams make_policy_params(Role role, const MarketParams& params,
                                const ObservationScaling& scaling,
                                const std::vector<std::size_t>& hidden, Rng& rng,
                                double initial_log_std) {
  if (role == Role::benchmark) throw ContractViolation("the benchmark quoter is not learned");
  PolicyParams p;
  p.role = role;
  p.action_space = action_space_for(role, params);
  p.scaling = scaling;
  NetworkShape shape{observation_dim(role), hidden, p.action_space.dim()};
  p.network = ActorCritic::initialized(std::move(shape), rng, initial_log_std);
  return p;
}

double gaussian_log_prob(std::span<const double> x, std::span<const double> mean,
                         std::span<const double> log_std) noexcept {
  constexpr double kHalfLog2Pi = 0.91893853320467274178;
  double lp = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = (x[i] - mean[i]) * std::exp(-log_std[i]);
    lp += -0.5 * z * z - log_std[i] - kHalfLog2Pi;
  }
  return lp;
}

PolicySample sample_policy(const PolicyParams& params, std::span<const double> features, Rng& rng,
                           bool deterministic) {
  const ActorCritic::Pass pass = params.network.forward(features);
  const auto log_std = params.network.log_std();
  PolicySample s;
  s.raw.resize(pass.mean.size());
  for (std::size_t i = 0; i < pass.mean.size(); ++i) {
    if (!std::isfinite(pass.mean[i]) || !std::isfinite(log_std[i])) {
      throw NumericalFault("policy network produced a non-finite action mean");
    }
    s.raw[i] = deterministic ? pass.mean[i] : pass.mean[i] + std::exp(log_std[i]) * rng.normal();
  }
  if (!std::isfinite(pass.value)) throw NumericalFault("critic produced a non-finite value");
  s.log_prob = gaussian_log_prob(s.raw, pass.mean, log_std);
  s.value = pass.value;
  s.squashed = squash_action(params.action_space, s.raw);
  s.action = decode_action(params.action_space, s.squashed);
  return s;
}

Action act_policy(const PolicyParams& params, const Observation& obs, Rng& rng,
                  bool deterministic) {
  const auto x = observation_features(obs, params.scaling);
  return sample_policy(params, x, rng, deterministic).action;
}

FixedOffsetPolicy::FixedOffsetPolicy(QuotePair quotes, double d_max) : quotes_(quotes) {
  if (!(quotes.d_bid >= 0.0 && quotes.d_bid <= d_max && quotes.d_ask >= 0.0 &&
        quotes.d_ask <= d_max)) {
    throw ConfigError("policy", "fixed offsets must lie in [0, d_max]");
  }
}

std::string FixedOffsetPolicy::describe() const {
  std::ostringstream os;
  os << "fixed:" << quotes_.d_bid << "," << quotes_.d_ask;
  return os.str();
}

Action RandomUniformPolicy::act(const Observation&, Rng& rng) const {
  std::vector<double> x(space_.dim());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.uniform(space_.bounds[i].low, space_.bounds[i].high);
  }
  return decode_action(space_, x);
}

Action BenchmarkPolicy::act(const Observation& obs, Rng&) const {
  if (!obs.own) throw ContractViolation("benchmark quoter needs its own inventory");
  return QuoteAction{quoter_.quote(obs.own->inventory, d_max_), std::nullopt};
}

std::string LearnedPolicy::describe() const {
  return std::string("learned:") + std::string(to_string(params_->role));
}

std::shared_ptr<const Policy> scripted_fixed_offset(double d_bid, double d_ask, double d_max) {
  return std::make_shared<FixedOffsetPolicy>(QuotePair{d_bid, d_ask}, d_max);
}

}  // namespace mmsim
