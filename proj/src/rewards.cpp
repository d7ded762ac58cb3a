#include "mmsim/rewards.hpp"

#include <cmath>

#include "mmsim/errors.hpp"

namespace mmsim {

void RewardConfig::validate() const {
  if (!(std::isfinite(zeta) && zeta >= 0.0)) throw ConfigError("zeta", "must be >= 0");
  if (!(std::isfinite(eta) && eta >= 0.0)) throw ConfigError("eta", "must be >= 0");
  if (!(std::isfinite(penalty_coeff) && penalty_coeff >= 0.0)) {
    throw ConfigError("penalty_coeff", "must be >= 0");
  }
}

double reward_self(double delta_pnl, std::int64_t inventory, bool is_terminal,
                   const RewardConfig& cfg) noexcept {
  const double i2 = static_cast<double>(inventory) * static_cast<double>(inventory);
  double r = delta_pnl - cfg.zeta * i2;
  if (is_terminal) r -= cfg.eta * i2;
  return r;
}

double reward_zero_sum(double opponent_reward) noexcept { return -opponent_reward; }

double reward_hybrid(double own_delta_pnl, std::int64_t own_inventory, bool is_terminal,
                     double opponent_reward, double omega, const RewardConfig& cfg) {
  if (!(omega >= 0.0 && omega <= 1.0)) {
    throw ContractViolation("hybrid reward: omega must lie in [0, 1]");
  }
  const double self = reward_self(own_delta_pnl, own_inventory, is_terminal, cfg);
  const double dev = omega - 0.5;
  return omega * self - (1.0 - omega) * opponent_reward - cfg.penalty_coeff * dev * dev;
}

double reward_adversary(double benchmark_delta_pnl, std::int64_t benchmark_inventory,
                        bool is_terminal, const RewardConfig& cfg) noexcept {
  return -reward_self(benchmark_delta_pnl, benchmark_inventory, is_terminal, cfg);
}

}  // namespace mmsim
