#pragma once

#include <cstdint>

namespace mmsim {

struct RewardConfig {
  double zeta = 0.01;           ///< running inventory penalty
  double eta = 0.1;             ///< terminal inventory penalty
  double penalty_coeff = 1.0;   ///< omega-deviation penalty for the hybrid agent

  /// Throws ConfigError naming the first negative coefficient.
  void validate() const;
};

/// dPnL - zeta I^2 - eta [terminal] I^2
double reward_self(double delta_pnl, std::int64_t inventory, bool is_terminal,
                   const RewardConfig& cfg) noexcept;

/// Exact negation of the opponent's reward.
double reward_zero_sum(double opponent_reward) noexcept;

/// omega r_self - (1 - omega) r_opponent - penalty_coeff (omega - 0.5)^2, with
/// r_self from reward_self on the agent's own account. Throws
/// ContractViolation for omega outside [0, 1].
double reward_hybrid(double own_delta_pnl, std::int64_t own_inventory, bool is_terminal,
                     double opponent_reward, double omega, const RewardConfig& cfg);

/// Negated reward_self of the benchmark quoter's account.
double reward_adversary(double benchmark_delta_pnl, std::int64_t benchmark_inventory,
                        bool is_terminal, const RewardConfig& cfg) noexcept;

}  // namespace mmsim
