#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmsim/environment.hpp"
#include "mmsim/policy.hpp"

namespace mmsim {

struct TrainConfig {
  std::size_t steps_per_rollout = 2048;
  std::size_t minibatch_size = 256;
  std::size_t epochs_per_update = 10;
  double clip_ratio = 0.2;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double entropy_coeff = 0.01;
  double value_coeff = 0.5;
  double learning_rate = 3e-4;
  double max_grad_norm = 0.5;
  std::size_t total_updates = 50;
  std::size_t eval_interval = 10;
  std::size_t eval_episodes = 5;
  std::uint64_t seed = 7;
  std::vector<std::size_t> hidden{64, 64};
  double initial_log_std = 0.0;
  /// Divide rewards by a running std of the discounted return before GAE.
  /// Only the learning targets are scaled; logged rewards stay raw.
  bool scale_rewards = true;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

/// Fixed-size on-policy batch. Actions are stored pre-squash.
struct TrajectoryBatch {
  std::size_t obs_dim = 0;
  std::size_t act_dim = 0;
  std::vector<double> observations;  ///< size() x obs_dim, row-major
  std::vector<double> actions;       ///< size() x act_dim, row-major
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<std::uint8_t> dones;
  std::vector<double> omegas;  ///< hybrid trainee only
  double bootstrap_value = 0.0;  ///< V of the state after the last transition
  double reward_scale = 1.0;     ///< multiplies rewards inside prepare_batch

  std::vector<double> advantages;  ///< normalized; filled by prepare_batch
  std::vector<double> returns;

  std::size_t size() const noexcept { return rewards.size(); }
  std::span<const double> observation(std::size_t i) const {
    return std::span<const double>(observations).subspan(i * obs_dim, obs_dim);
  }
  std::span<const double> action(std::size_t i) const {
    return std::span<const double>(actions).subspan(i * act_dim, act_dim);
  }
};

struct AdvantageEstimate {
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// Recursive generalized advantage estimation. `dones[t]` marks transition t
/// as the last of its episode; `bootstrap_value` values the state after the
/// final transition when it is not terminal. Advantages are not normalized.
AdvantageEstimate gae_advantages(std::span<const double> rewards, std::span<const double> values,
                                 std::span<const std::uint8_t> dones, double bootstrap_value,
                                 double gamma, double lambda);

/// In place: zero mean, unit (population) std; all-equal input becomes zeros.
void normalize_advantages(std::vector<double>& advantages);

/// Fills batch.advantages (normalized) and batch.returns, from rewards
/// multiplied by batch.reward_scale.
void prepare_batch(TrajectoryBatch& batch, const TrainConfig& cfg);

/// Running variance of the per-episode discounted return, used to pick
/// TrajectoryBatch::reward_scale.
class ReturnScaler {
 public:
  explicit ReturnScaler(double gamma) : gamma_(gamma) {}
  /// Feeds the batch's rewards in order and returns 1 / std of the discounted
  /// return seen so far (1 until two samples exist).
  double observe(const TrajectoryBatch& batch);

 private:
  double gamma_;
  double running_return_ = 0.0;
  double count_ = 0.0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Tracks episode boundaries across consecutive rollouts.
struct RolloutCursor {
  std::uint64_t seed = 0;
  std::uint64_t next_episode = 0;
  bool needs_reset = true;
};

/// Steps `env` (which must have exactly one external slot, driven by
/// `trainee`) for cfg.steps_per_rollout transitions. Episodes continue across
/// calls through `cursor`. Throws NumericalFault on any non-finite transition.
TrajectoryBatch collect_rollout(Environment& env, const PolicyParams& trainee,
                                const TrainConfig& cfg, RolloutCursor& cursor, Rng& rng);

struct LossBreakdown {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  double max_ratio_deviation = 0.0;  ///< max |ratio - 1| over the samples
};

/// Clipped-surrogate loss + value_coeff * MSE(value, return) - entropy_coeff *
/// entropy over the samples in `indices`. When `grad` is non-empty the exact
/// gradient w.r.t. every network parameter is accumulated into it.
LossBreakdown ppo_loss(const PolicyParams& params, const TrajectoryBatch& batch,
                       std::span<const std::size_t> indices, const TrainConfig& cfg,
                       std::span<double> grad = {});

/// Bias-corrected RMSProp without momentum.
struct OptimizerState {
  double rho = 0.99;
  double epsilon = 1e-8;
  std::vector<double> second_moment;
  std::int64_t steps = 0;
};

std::string optimizer_description(const OptimizerState& state);
void optimizer_step(std::span<double> params, std::span<const double> grad, OptimizerState& state,
                    double learning_rate);

struct UpdateDiagnostics {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  /// Max |ratio - 1| over the batch before the first gradient step.
  double initial_ratio_deviation = 0.0;
};

/// epochs_per_update passes of shuffled minibatch steps over a prepared batch.
/// On a non-finite loss or gradient throws NumericalFault and leaves both
/// `params` and `opt` untouched.
UpdateDiagnostics update_policy(PolicyParams& params, OptimizerState& opt,
                                const TrajectoryBatch& batch, const TrainConfig& cfg, Rng& rng);

struct CurvePoint {
  std::size_t update_index = 0;
  double mean_reward = 0.0;  ///< mean per-step reward of the rollout
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  std::optional<double> mean_omega;
};

struct EvalPoint {
  std::size_t update_index = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
  std::optional<double> mean_omega;
};

/// Whose reward counts as "the" return of an evaluation episode: a quoting
/// agent index, or the adversary when empty.
using ReturnOwner = std::optional<std::size_t>;

struct EvaluationSummary {
  std::vector<double> episode_returns;
  std::optional<double> mean_omega;
};

/// Runs `episodes` episodes of a fully policy-driven environment and sums
/// the owner's reward per episode.
EvaluationSummary evaluate_returns(const EnvironmentSpec& spec, ReturnOwner owner,
                                   std::size_t episodes, std::uint64_t seed);

struct TrainingRun {
  PolicyParams policy;
  std::vector<CurvePoint> curve;
  std::vector<EvalPoint> evals;
};

using ProgressCallback = std::function<void(const CurvePoint&, const EvalPoint*)>;

/// The generic trainer: `spec` must contain one external slot whose action
/// kind matches `initial`. Evaluates (deterministic policy) before the first
/// update and every cfg.eval_interval updates.
TrainingRun train_policy(const EnvironmentSpec& spec, PolicyParams initial, const TrainConfig& cfg,
                         const ProgressCallback& progress = {});

enum class Stage { adversary_pretrain, train_a, train_b };

std::string_view to_string(Stage stage) noexcept;

struct StageSpec {
  Stage stage = Stage::adversary_pretrain;
  Role trainee = Role::adversary;
  /// Required by train_a: the frozen adversary driving lambda and sigma.
  std::shared_ptr<const PolicyParams> adversary;
  /// Required by train_b: the frozen counterparty (normally Agent A).
  std::shared_ptr<const PolicyParams> opponent;
};

struct StageEnvironment {
  EnvironmentConfig env;
  BenchmarkQuoter benchmark;
  ObservationScaling scaling;
  std::string config_hash;
};

/// The environment a stage trains in, with the trainee slot external.
EnvironmentSpec stage_environment(const StageSpec& spec, const StageEnvironment& env);

/// Stage 1 trains the adversary against the benchmark quoter; stage 2 trains
/// Agent A under the frozen adversary; stage 3 trains a B-type agent against
/// the frozen opponent in the fixed market. Throws ConfigError when a
/// prerequisite checkpoint is missing.
TrainingRun run_stage(const StageSpec& spec, const TrainConfig& cfg, const StageEnvironment& env,
                      const ProgressCallback& progress = {});

/// update_index,mean_reward,policy_loss,value_loss,entropy,clip_fraction,mean_omega
std::string training_curve_csv(const std::vector<CurvePoint>& curve);
std::string eval_curve_csv(const std::vector<EvalPoint>& evals);

}  // namespace mmsim
