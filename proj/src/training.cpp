#include "mmsim/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mmsim/errors.hpp"
#include "mmsim/format.hpp"

namespace mmsim {
namespace {

constexpr double kHalfLog2PiE = 1.4189385332046727;  // 0.5 * (1 + log(2 pi))

void require(bool ok, const char* key, const char* message) {
  if (!ok) throw ConfigError(key, message);
}

double mean_or_nan(const std::vector<double>& xs) {
  if (xs.empty()) return std::nan("");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

std::optional<double> optional_mean(const std::vector<double>& xs) {
  if (xs.empty()) return std::nullopt;
  return mean_or_nan(xs);
}

double trainee_reward(const Environment& env, const StepResult& r) {
  if (env.adversary_is_external()) return r.adversary_reward;
  return r.rewards[*env.external_agent()];
}

/// Copy of `spec` where the external slot is driven by `policy`.
EnvironmentSpec with_policy(const EnvironmentSpec& spec, std::shared_ptr<const Policy> policy,
                            ReturnOwner& owner) {
  EnvironmentSpec out = spec;
  if (out.adversary && !*out.adversary) {
    *out.adversary = std::move(policy);
    owner.reset();
    return out;
  }
  for (std::size_t i = 0; i < out.agents.size(); ++i) {
    if (!out.agents[i].policy) {
      out.agents[i].policy = std::move(policy);
      owner = i;
      return out;
    }
  }
  throw ContractViolation("environment has no external slot");
}

}  // namespace

void TrainConfig::validate() const {
  require(steps_per_rollout > 0, "steps_per_rollout", "must be positive");
  require(minibatch_size > 0, "minibatch_size", "must be positive");
  require(epochs_per_update > 0, "epochs_per_update", "must be positive");
  require(std::isfinite(clip_ratio) && clip_ratio > 0.0, "clip_ratio", "must be > 0");
  require(gamma > 0.0 && gamma <= 1.0, "gamma", "must lie in (0, 1]");
  require(gae_lambda > 0.0 && gae_lambda <= 1.0, "gae_lambda", "must lie in (0, 1]");
  require(std::isfinite(entropy_coeff) && entropy_coeff >= 0.0, "entropy_coeff", "must be >= 0");
  require(std::isfinite(value_coeff) && value_coeff >= 0.0, "value_coeff", "must be >= 0");
  require(std::isfinite(learning_rate) && learning_rate >= 0.0, "learning_rate", "must be >= 0");
  require(std::isfinite(max_grad_norm) && max_grad_norm > 0.0, "max_grad_norm", "must be > 0");
  require(eval_interval > 0, "eval_interval", "must be positive");
  require(std::isfinite(initial_log_std), "initial_log_std", "must be finite");
  for (std::size_t h : hidden) require(h > 0, "hidden", "layer widths must be positive");
}

AdvantageEstimate gae_advantages(std::span<const double> rewards, std::span<const double> values,
                                 std::span<const std::uint8_t> dones, double bootstrap_value,
                                 double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) {
    throw ContractViolation("gae: rewards, values and dones must have equal length");
  }
  AdvantageEstimate est;
  est.advantages.assign(n, 0.0);
  est.returns.assign(n, 0.0);
  double running = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double next_value = t + 1 < n ? values[t + 1] : bootstrap_value;
    const double live = dones[t] ? 0.0 : 1.0;
    const double delta = rewards[t] + gamma * next_value * live - values[t];
    running = delta + gamma * lambda * live * running;
    est.advantages[t] = running;
    est.returns[t] = running + values[t];
  }
  return est;
}

void normalize_advantages(std::vector<double>& advantages) {
  if (advantages.empty()) return;
  const double n = static_cast<double>(advantages.size());
  const double mean = std::accumulate(advantages.begin(), advantages.end(), 0.0) / n;
  double ss = 0.0;
  for (double a : advantages) ss += (a - mean) * (a - mean);
  const double sd = std::sqrt(ss / n);
  for (double& a : advantages) a = (a - mean) / (sd + 1e-8);
}

void prepare_batch(TrajectoryBatch& batch, const TrainConfig& cfg) {
  std::vector<double> scaled(batch.rewards);
  for (double& r : scaled) r *= batch.reward_scale;
  auto est = gae_advantages(scaled, batch.values, batch.dones, batch.bootstrap_value,
                            cfg.gamma, cfg.gae_lambda);
  normalize_advantages(est.advantages);
  batch.advantages = std::move(est.advantages);
  batch.returns = std::move(est.returns);
}

double ReturnScaler::observe(const TrajectoryBatch& batch) {
  for (std::size_t i = 0; i < batch.size(); ++i) {
    running_return_ = running_return_ * gamma_ + batch.rewards[i];
    count_ += 1.0;
    const double delta = running_return_ - mean_;
    mean_ += delta / count_;
    m2_ += delta * (running_return_ - mean_);
    if (batch.dones[i]) running_return_ = 0.0;
  }
  if (count_ < 2.0) return 1.0;
  return 1.0 / std::sqrt(m2_ / count_ + 1e-8);
}

TrajectoryBatch collect_rollout(Environment& env, const PolicyParams& trainee,
                                const TrainConfig& cfg, RolloutCursor& cursor, Rng& rng) {
  if (action_kind(env.external_role()) != trainee.action_space.kind) {
    throw ConfigError("trainee", "trainee policy does not fit the external slot");
  }
  TrajectoryBatch batch;
  batch.obs_dim = trainee.network.shape().input_dim;
  batch.act_dim = trainee.network.shape().action_dim;
  const std::size_t n = cfg.steps_per_rollout;
  batch.observations.reserve(n * batch.obs_dim);
  batch.actions.reserve(n * batch.act_dim);
  const bool hybrid = env.external_role() == Role::agent_bstar;

  for (std::size_t t = 0; t < n; ++t) {
    if (cursor.needs_reset) {
      env.reset(derive_seed(cursor.seed, cursor.next_episode), cursor.next_episode);
      ++cursor.next_episode;
      cursor.needs_reset = false;
    }
    const auto x = observation_features(env.external_observation(), trainee.scaling);
    const PolicySample s = sample_policy(trainee, x, rng, false);
    const StepResult r = env.step(s.action);
    const double reward = trainee_reward(env, r);
    if (!std::isfinite(reward) || !std::isfinite(s.value) || !std::isfinite(s.log_prob)) {
      std::ostringstream os;
      os << "non-finite transition at rollout step " << t << " (episode "
         << cursor.next_episode - 1 << ", reward " << reward << ", value " << s.value
         << ", log_prob " << s.log_prob << ")";
      throw NumericalFault(os.str());
    }
    batch.observations.insert(batch.observations.end(), x.begin(), x.end());
    batch.actions.insert(batch.actions.end(), s.raw.begin(), s.raw.end());
    batch.log_probs.push_back(s.log_prob);
    batch.values.push_back(s.value);
    batch.rewards.push_back(reward);
    batch.dones.push_back(r.done ? 1 : 0);
    if (hybrid && r.omega) batch.omegas.push_back(*r.omega);
    if (r.done) cursor.needs_reset = true;
  }
  if (!cursor.needs_reset) {
    const auto x = observation_features(env.external_observation(), trainee.scaling);
    batch.bootstrap_value = trainee.network.forward(x).value;
  }
  return batch;
}

LossBreakdown ppo_loss(const PolicyParams& params, const TrajectoryBatch& batch,
                       std::span<const std::size_t> indices, const TrainConfig& cfg,
                       std::span<double> grad) {
  if (indices.empty()) throw ContractViolation("ppo_loss needs at least one sample");
  if (batch.advantages.size() != batch.size() || batch.returns.size() != batch.size()) {
    throw ContractViolation("ppo_loss: batch has not been prepared");
  }
  const ActorCritic& net = params.network;
  const auto log_std = net.log_std();
  const std::size_t act_dim = net.shape().action_dim;
  const bool want_grad = !grad.empty();
  const double m = static_cast<double>(indices.size());

  LossBreakdown out;
  std::vector<double> d_mean(act_dim);
  std::vector<double> d_log_std(act_dim);
  std::vector<double> inv_var(act_dim);
  for (std::size_t d = 0; d < act_dim; ++d) inv_var[d] = std::exp(-2.0 * log_std[d]);

  for (std::size_t idx : indices) {
    const auto pass = net.forward(batch.observation(idx));
    const auto u = batch.action(idx);
    const double log_prob = gaussian_log_prob(u, pass.mean, log_std);
    const double ratio = std::exp(log_prob - batch.log_probs[idx]);
    const double adv = batch.advantages[idx];
    const double clipped_ratio = std::clamp(ratio, 1.0 - cfg.clip_ratio, 1.0 + cfg.clip_ratio);
    const double unclipped = ratio * adv;
    const double clipped = clipped_ratio * adv;
    const bool use_unclipped = unclipped <= clipped;
    out.policy -= std::min(unclipped, clipped) / m;

    const double value_error = pass.value - batch.returns[idx];
    out.value += value_error * value_error / m;

    const double log_ratio = log_prob - batch.log_probs[idx];
    out.approx_kl += ((ratio - 1.0) - log_ratio) / m;
    if (std::fabs(ratio - 1.0) > cfg.clip_ratio) out.clip_fraction += 1.0 / m;
    out.max_ratio_deviation = std::max(out.max_ratio_deviation, std::fabs(ratio - 1.0));

    if (want_grad) {
      const double d_log_prob = use_unclipped ? -adv * ratio / m : 0.0;
      for (std::size_t d = 0; d < act_dim; ++d) {
        const double diff = u[d] - pass.mean[d];
        d_mean[d] = d_log_prob * diff * inv_var[d];
        d_log_std[d] = d_log_prob * (diff * diff * inv_var[d] - 1.0);
      }
      const double d_value = cfg.value_coeff * 2.0 * value_error / m;
      net.backward(pass, d_mean, d_value, d_log_std, grad);
    }
  }

  for (std::size_t d = 0; d < act_dim; ++d) out.entropy += log_std[d] + kHalfLog2PiE;
  out.total = out.policy + cfg.value_coeff * out.value - cfg.entropy_coeff * out.entropy;
  if (want_grad && cfg.entropy_coeff != 0.0) {
    std::fill(d_log_std.begin(), d_log_std.end(), -cfg.entropy_coeff);
    net.add_log_std_gradient(d_log_std, grad);
  }
  return out;
}

std::string optimizer_description(const OptimizerState& state) {
  std::ostringstream os;
  os << "rmsprop(rho=" << state.rho << ",eps=" << state.epsilon << ",bias_corrected,no_momentum)";
  return os.str();
}

void optimizer_step(std::span<double> params, std::span<const double> grad, OptimizerState& state,
                    double learning_rate) {
  if (grad.size() != params.size()) throw ContractViolation("optimizer: gradient size mismatch");
  if (state.second_moment.size() != params.size()) state.second_moment.assign(params.size(), 0.0);
  ++state.steps;
  const double correction = 1.0 - std::pow(state.rho, static_cast<double>(state.steps));
  for (std::size_t i = 0; i < params.size(); ++i) {
    double& v = state.second_moment[i];
    v = state.rho * v + (1.0 - state.rho) * grad[i] * grad[i];
    params[i] -= learning_rate * grad[i] / (std::sqrt(v / correction) + state.epsilon);
  }
}

UpdateDiagnostics update_policy(PolicyParams& params, OptimizerState& opt,
                                const TrajectoryBatch& batch, const TrainConfig& cfg, Rng& rng) {
  const std::size_t n = batch.size();
  if (n == 0) throw ContractViolation("update_policy: empty batch");
  PolicyParams work = params;
  OptimizerState work_opt = opt;
  UpdateDiagnostics diag;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  diag.initial_ratio_deviation = ppo_loss(work, batch, order, cfg).max_ratio_deviation;

  const std::size_t mb = std::min(cfg.minibatch_size, n);
  std::vector<double> grad(work.network.parameter_count());
  std::size_t minibatches = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs_per_update; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
    for (std::size_t start = 0; start < n; start += mb) {
      const std::size_t len = std::min(mb, n - start);
      const std::span<const std::size_t> idx(order.data() + start, len);
      std::fill(grad.begin(), grad.end(), 0.0);
      const LossBreakdown loss = ppo_loss(work, batch, idx, cfg, grad);
      double norm_sq = 0.0;
      for (double g : grad) norm_sq += g * g;
      if (!std::isfinite(loss.total) || !std::isfinite(norm_sq)) {
        throw NumericalFault("non-finite loss or gradient in epoch " + std::to_string(epoch) +
                             "; policy left unchanged");
      }
      const double norm = std::sqrt(norm_sq);
      if (norm > cfg.max_grad_norm) {
        const double scale = cfg.max_grad_norm / norm;
        for (double& g : grad) g *= scale;
      }
      optimizer_step(work.network.parameters(), grad, work_opt, cfg.learning_rate);

      diag.policy_loss += loss.policy;
      diag.value_loss += loss.value;
      diag.entropy += loss.entropy;
      diag.clip_fraction += loss.clip_fraction;
      diag.approx_kl += loss.approx_kl;
      ++minibatches;
    }
  }
  const double k = static_cast<double>(minibatches);
  diag.policy_loss /= k;
  diag.value_loss /= k;
  diag.entropy /= k;
  diag.clip_fraction /= k;
  diag.approx_kl /= k;
  params = std::move(work);
  opt = std::move(work_opt);
  return diag;
}

EvaluationSummary evaluate_returns(const EnvironmentSpec& spec, ReturnOwner owner,
                                   std::size_t episodes, std::uint64_t seed) {
  Environment env(spec);
  if (env.adversary_is_external() || env.external_agent()) {
    throw ContractViolation("evaluate_returns needs a fully policy-driven environment");
  }
  EvaluationSummary summary;
  std::vector<double> omegas;
  for (std::size_t e = 0; e < episodes; ++e) {
    env.reset(derive_seed(seed, e), e);
    double total = 0.0;
    while (!env.done()) {
      const StepResult r = env.step();
      total += owner ? r.rewards[*owner] : r.adversary_reward;
    }
    summary.episode_returns.push_back(total);
    if (owner && spec.agents[*owner].role == Role::agent_bstar) {
      for (const auto& s : env.log().steps) omegas.push_back(s.agents[*owner].omega);
    }
  }
  summary.mean_omega = optional_mean(omegas);
  return summary;
}

TrainingRun train_policy(const EnvironmentSpec& spec, PolicyParams initial, const TrainConfig& cfg,
                         const ProgressCallback& progress) {
  cfg.validate();
  Environment env(spec);
  if (!env.adversary_is_external() && !env.external_agent()) {
    throw ConfigError("trainee", "the training environment needs an external slot");
  }
  if (action_kind(env.external_role()) != initial.action_space.kind) {
    throw ConfigError("trainee", "initial policy does not fit the external slot");
  }

  TrainingRun run;
  run.policy = std::move(initial);
  OptimizerState opt;
  run.policy.optimizer = optimizer_description(opt);
  run.policy.config_hash = spec.config_hash;

  RolloutCursor cursor{derive_seed(cfg.seed, 0x5eed), 0, true};
  Rng sample_rng(derive_seed(cfg.seed, 0xac7));
  Rng shuffle_rng(derive_seed(cfg.seed, 0x5f1e));
  const std::uint64_t eval_seed = derive_seed(cfg.seed, 0xe7a1);
  ReturnScaler scaler(cfg.gamma);

  auto evaluate = [&](std::size_t update) {
    ReturnOwner owner;
    auto frozen = std::make_shared<const PolicyParams>(run.policy);
    const EnvironmentSpec eval_spec =
        with_policy(spec, std::make_shared<LearnedPolicy>(frozen, true), owner);
    const EvaluationSummary s = evaluate_returns(eval_spec, owner, cfg.eval_episodes, eval_seed);
    EvalPoint p;
    p.update_index = update;
    p.mean_return = mean_or_nan(s.episode_returns);
    double ss = 0.0;
    for (double r : s.episode_returns) ss += (r - p.mean_return) * (r - p.mean_return);
    p.std_return = s.episode_returns.size() > 1
                       ? std::sqrt(ss / static_cast<double>(s.episode_returns.size() - 1))
                       : 0.0;
    p.mean_omega = s.mean_omega;
    run.evals.push_back(p);
    return &run.evals.back();
  };

  if (cfg.eval_episodes > 0) {
    const EvalPoint* first = evaluate(0);
    if (progress) progress(CurvePoint{}, first);
  }
  for (std::size_t u = 1; u <= cfg.total_updates; ++u) {
    TrajectoryBatch batch = collect_rollout(env, run.policy, cfg, cursor, sample_rng);
    if (cfg.scale_rewards) batch.reward_scale = scaler.observe(batch);
    prepare_batch(batch, cfg);
    const UpdateDiagnostics d = update_policy(run.policy, opt, batch, cfg, shuffle_rng);
    CurvePoint c{u,
                 mean_or_nan(batch.rewards),
                 d.policy_loss,
                 d.value_loss,
                 d.entropy,
                 d.clip_fraction,
                 optional_mean(batch.omegas)};
    run.curve.push_back(c);
    const EvalPoint* e = nullptr;
    if (cfg.eval_episodes > 0 && (u % cfg.eval_interval == 0 || u == cfg.total_updates)) {
      e = evaluate(u);
    }
    if (progress) progress(c, e);
  }
  return run;
}

std::string_view to_string(Stage stage) noexcept {
  switch (stage) {
    case Stage::adversary_pretrain:
      return "adversary_pretrain";
    case Stage::train_a:
      return "train_A";
    case Stage::train_b:
      return "train_B";
  }
  return "unknown";
}

EnvironmentSpec stage_environment(const StageSpec& spec, const StageEnvironment& env) {
  EnvironmentSpec out;
  out.config = env.env;
  out.config_hash = env.config_hash;
  out.scenario = "train_" + std::string(short_label(spec.trainee));
  switch (spec.stage) {
    case Stage::adversary_pretrain:
      if (spec.trainee != Role::adversary) {
        throw ConfigError("stage", "adversary_pretrain trains the adversary");
      }
      out.adversary = std::shared_ptr<const Policy>{};
      out.benchmark = env.benchmark;
      out.metric_agents = {"benchmark"};
      break;
    case Stage::train_a:
      if (spec.trainee != Role::agent_a) throw ConfigError("stage", "train_A trains Agent A");
      if (!spec.adversary) {
        throw ConfigError("stage", "train_A requires a stage-1 adversary checkpoint");
      }
      if (spec.adversary->role != Role::adversary) {
        throw ConfigError("stage", "train_A: the adversary checkpoint has the wrong role");
      }
      out.adversary = std::make_shared<LearnedPolicy>(spec.adversary, false);
      out.agents.push_back({Role::agent_a, "A", nullptr, std::nullopt});
      out.metric_agents = {"A"};
      break;
    case Stage::train_b: {
      if (spec.trainee != Role::agent_b1 && spec.trainee != Role::agent_b2 &&
          spec.trainee != Role::agent_bstar) {
        throw ConfigError("stage", "train_B trains B1, B2 or BStar");
      }
      if (!spec.opponent) {
        throw ConfigError("stage", "train_B requires a stage-2 Agent A (or other opponent) checkpoint");
      }
      if (spec.opponent->action_space.kind == ActionKind::market_control) {
        throw ConfigError("stage", "train_B: the opponent checkpoint does not quote");
      }
      std::string opp_label(short_label(spec.opponent->role));
      std::string own_label(short_label(spec.trainee));
      if (opp_label == own_label) {
        opp_label += "_1";
        own_label += "_2";
      }
      out.agents.push_back({spec.opponent->role, opp_label,
                            std::make_shared<LearnedPolicy>(spec.opponent, true), std::nullopt});
      out.agents.push_back({spec.trainee, own_label, nullptr, std::size_t{0}});
      out.metric_agents = {opp_label, own_label};
      break;
    }
  }
  return out;
}

TrainingRun run_stage(const StageSpec& spec, const TrainConfig& cfg, const StageEnvironment& env,
                      const ProgressCallback& progress) {
  cfg.validate();
  const EnvironmentSpec env_spec = stage_environment(spec, env);
  Rng init_rng(derive_seed(cfg.seed, 0x1417));
  PolicyParams initial = make_policy_params(spec.trainee, env.env.market, env.scaling, cfg.hidden,
                                            init_rng, cfg.initial_log_std);
  return train_policy(env_spec, std::move(initial), cfg, progress);
}

std::string training_curve_csv(const std::vector<CurvePoint>& curve) {
  std::ostringstream os;
  os << "update_index,mean_reward,policy_loss,value_loss,entropy,clip_fraction,mean_omega\n";
  for (const auto& c : curve) {
    os << c.update_index << ',' << format_double(c.mean_reward) << ','
       << format_double(c.policy_loss) << ',' << format_double(c.value_loss) << ','
       << format_double(c.entropy) << ',' << format_double(c.clip_fraction) << ','
       << (c.mean_omega ? format_double(*c.mean_omega) : std::string{}) << '\n';
  }
  return os.str();
}

std::string eval_curve_csv(const std::vector<EvalPoint>& evals) {
  std::ostringstream os;
  os << "update_index,mean_return,std_return,mean_omega\n";
  for (const auto& e : evals) {
    os << e.update_index << ',' << format_double(e.mean_return) << ','
       << format_double(e.std_return) << ','
       << (e.mean_omega ? format_double(*e.mean_omega) : std::string{}) << '\n';
  }
  return os.str();
}

}  // namespace mmsim
