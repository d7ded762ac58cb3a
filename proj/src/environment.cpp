#include "mmsim/environment.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "mmsim/errors.hpp"

namespace mmsim {
namespace {

bool kind_fits(Role role, ActionKind kind) { return action_kind(role) == kind; }

}  // namespace

Environment::Environment(EnvironmentSpec spec) : spec_(std::move(spec)) {
  const EnvironmentConfig& cfg = spec_.config;
  cfg.market.validate();
  cfg.rewards.validate();
  if (cfg.horizon < 1) throw ConfigError("horizon", "must be >= 1");
  if (!std::isfinite(cfg.initial_price)) throw ConfigError("initial_price", "must be finite");
  if (spec_.agents.empty() && !spec_.benchmark) {
    throw ConfigError("roster", "at least one quoting participant is required");
  }

  roster_ = spec_.agents;
  if (spec_.benchmark) {
    roster_.push_back({Role::benchmark, "benchmark",
                       std::make_shared<BenchmarkPolicy>(*spec_.benchmark, cfg.market.d_max),
                       std::nullopt});
  }

  std::set<std::string> labels;
  std::size_t externals = 0;
  for (std::size_t i = 0; i < roster_.size(); ++i) {
    AgentSlot& slot = roster_[i];
    if (slot.role == Role::adversary) {
      throw ConfigError("roster", "the adversary cannot hold a quoting slot");
    }
    if (slot.label.empty()) slot.label = std::string(short_label(slot.role));
    if (!labels.insert(slot.label).second) {
      throw ConfigError("roster", "duplicate agent label '" + slot.label + "'");
    }
    if (!slot.policy) {
      external_agent_ = i;
      ++externals;
    } else if (!kind_fits(slot.role, slot.policy->kind())) {
      throw ConfigError("roster", "policy '" + slot.policy->describe() + "' emits " +
                                      std::string(to_string(slot.policy->kind())) +
                                      " actions but slot '" + slot.label + "' needs " +
                                      std::string(to_string(action_kind(slot.role))));
    }
    if (slot.role == Role::agent_b2 || slot.role == Role::agent_bstar) {
      if (!slot.opponent && spec_.agents.size() == 2) slot.opponent = 1 - i;
      if (!slot.opponent || *slot.opponent >= roster_.size() || *slot.opponent == i) {
        throw ConfigError("roster", "agent '" + slot.label + "' needs an opponent");
      }
    }
  }
  if (spec_.adversary) {
    const auto& adv = *spec_.adversary;
    if (!adv) {
      adversary_external_ = true;
      ++externals;
    } else if (adv->kind() != ActionKind::market_control) {
      throw ConfigError("adversary", "policy '" + adv->describe() +
                                         "' does not emit market-control actions");
    }
  }
  if (externals > 1) throw ConfigError("roster", "at most one externally driven slot");

  for (const auto& label : spec_.metric_agents) {
    if (!labels.count(label)) throw ConfigError("metric_agents", "unknown agent '" + label + "'");
  }
  reset(0);
}

Role Environment::external_role() const {
  if (adversary_external_) return Role::adversary;
  if (external_agent_) return roster_[*external_agent_].role;
  throw ContractViolation("environment has no external slot");
}

Observation Environment::external_observation() const {
  if (adversary_external_) return observe_adversary();
  if (external_agent_) return observe_agent(*external_agent_);
  throw ContractViolation("environment has no external slot");
}

void Environment::reset(std::uint64_t seed, std::size_t episode_index) {
  const EnvironmentConfig& cfg = spec_.config;
  state_ = MarketState::initial(cfg.initial_price, cfg.horizon, participant_count());
  market_rng_ = Rng(derive_seed(seed, 0));
  policy_rng_ = Rng(derive_seed(seed, 1));
  last_pnl_.assign(participant_count(), 0.0);

  log_ = EpisodeLog{};
  log_.meta.scenario = spec_.scenario;
  log_.meta.episode_index = episode_index;
  log_.meta.seed = seed;
  log_.meta.config_hash = spec_.config_hash;
  log_.meta.initial_price = cfg.initial_price;
  log_.meta.horizon = cfg.horizon;
  log_.meta.metric_agents = spec_.metric_agents;
  log_.meta.herding_epsilon = spec_.herding_epsilon;
  for (const auto& slot : roster_) log_.agents.push_back({slot.label, slot.role});
  log_.steps.reserve(static_cast<std::size_t>(cfg.horizon));
}

Observation Environment::observe_agent(std::size_t agent) const {
  if (agent >= roster_.size()) throw ContractViolation("observe: unknown agent");
  return observe(state_, agent, roster_[agent].role);
}

Observation Environment::observe_adversary() const {
  return observe(state_, 0, Role::adversary);
}

StepResult Environment::step(const std::optional<Action>& external) {
  if (done()) throw ContractViolation("step called on a finished episode");
  const bool has_external = adversary_external_ || external_agent_.has_value();
  if (has_external != external.has_value()) {
    throw ContractViolation(has_external ? "step: the external slot needs an action"
                                         : "step: no external slot to receive an action");
  }
  const EnvironmentConfig& cfg = spec_.config;
  MarketParams params = cfg.market;

  StepResult result;
  if (spec_.adversary) {
    const Action a = adversary_external_ ? *external
                                         : (*spec_.adversary)->act(observe_adversary(), policy_rng_);
    const auto* control = std::get_if<MarketControl>(&a);
    if (!control) throw ContractViolation("adversary action must be a market control");
    if (!std::isfinite(control->lambda_rate) || !std::isfinite(control->sigma)) {
      throw NumericalFault("adversary produced a non-finite market control");
    }
    params.lambda_rate = cfg.market.lambda_bounds.clamp(control->lambda_rate);
    params.sigma = cfg.market.sigma_bounds.clamp(control->sigma);
  }

  const std::size_t n = participant_count();
  std::vector<QuotePair> quotes(n);
  std::vector<double> omegas(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < n; ++i) {
    const AgentSlot& slot = roster_[i];
    const bool is_external = external_agent_ && *external_agent_ == i;
    const Action a = is_external ? *external : slot.policy->act(observe_agent(i), policy_rng_);
    const auto* q = std::get_if<QuoteAction>(&a);
    if (!q) throw ContractViolation("agent '" + slot.label + "' must emit quotes");
    quotes[i] = clamp_quote(q->quotes, params.d_max);
    if (slot.role == Role::agent_bstar) {
      if (!q->omega || !std::isfinite(*q->omega)) {
        throw ContractViolation("hybrid agent '" + slot.label + "' must emit a finite omega");
      }
      omegas[i] = Interval{0.0, 1.0}.clamp(*q->omega);
    }
  }

  result.outcome = advance(state_, params, quotes, market_rng_);
  const bool terminal = state_.finished();
  const double mid = state_.mid_price;

  std::vector<double> delta(n);
  std::vector<double> self_reward(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pnl = mark_to_market(state_.accounts[i], mid);
    delta[i] = pnl - last_pnl_[i];
    last_pnl_[i] = pnl;
    self_reward[i] = reward_self(delta[i], state_.accounts[i].inventory, terminal, cfg.rewards);
  }
  result.rewards.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const AgentSlot& slot = roster_[i];
    switch (slot.role) {
      case Role::agent_b2:
        result.rewards[i] = reward_zero_sum(self_reward[*slot.opponent]);
        break;
      case Role::agent_bstar:
        result.rewards[i] = reward_hybrid(delta[i], state_.accounts[i].inventory, terminal,
                                          self_reward[*slot.opponent], omegas[i], cfg.rewards);
        break;
      default:
        result.rewards[i] = self_reward[i];
        break;
    }
  }
  if (spec_.benchmark) {
    const std::size_t b = n - 1;
    result.adversary_reward =
        reward_adversary(delta[b], state_.accounts[b].inventory, terminal, cfg.rewards);
  }
  if (external_agent_ && roster_[*external_agent_].role == Role::agent_bstar) {
    result.omega = omegas[*external_agent_];
  }
  result.done = terminal;

  StepRecord rec;
  rec.step = state_.step - 1;
  rec.mid_price = mid;
  rec.lambda_rate = params.lambda_rate;
  rec.sigma = params.sigma;
  rec.n_arrivals = result.outcome.n_arrivals;
  rec.buys = result.outcome.buys;
  rec.sells = result.outcome.sells;
  rec.agents.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const AgentFill& f = result.outcome.fills[i];
    rec.agents[i] = AgentStep{quotes[i].d_bid,
                              quotes[i].d_ask,
                              f.bid_price,
                              f.ask_price,
                              f.bid_fills,
                              f.ask_fills,
                              state_.accounts[i].inventory,
                              state_.accounts[i].cash,
                              result.rewards[i],
                              omegas[i]};
  }
  log_.steps.push_back(std::move(rec));
  log_.meta.nonpositive_price_steps = state_.nonpositive_price_steps;
  return result;
}

EpisodeLog Environment::release_log() {
  EpisodeLog out = std::move(log_);
  log_ = EpisodeLog{};
  return out;
}

}  // namespace mmsim
