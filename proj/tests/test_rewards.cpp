#include <doctest.h>

#include "mmsim/errors.hpp"
#include "mmsim/rewards.hpp"

using namespace mmsim;

TEST_SUITE("rewards") {

TEST_CASE("self-interested reward") {
  const RewardConfig cfg;
  CHECK(reward_self(10.0, 0, false, cfg) == 10.0);
  CHECK(reward_self(10.0, 3, false, cfg) == doctest::Approx(10.0 - 0.01 * 9));
  CHECK(reward_self(10.0, -3, true, cfg) == doctest::Approx(10.0 - 0.01 * 9 - 0.1 * 9));
}

TEST_CASE("zero-sum reward is the exact negation") {
  for (double r : {0.0, 1.5, -2.25, 1e300, -7.123456789}) {
    CHECK(reward_zero_sum(r) + r == 0.0);
  }
}

TEST_CASE("adversary reward negates the benchmark's self reward") {
  const RewardConfig cfg;
  CHECK(reward_adversary(4.0, 7, true, cfg) == -reward_self(4.0, 7, true, cfg));
}

TEST_CASE("hybrid endpoints and midpoint") {
  RewardConfig cfg;
  cfg.penalty_coeff = 2.0;
  const double dpnl = 3.0;
  const std::int64_t inv = 4;
  const double r_self = reward_self(dpnl, inv, false, cfg);
  const double r_opp = -1.75;
  CHECK(reward_hybrid(dpnl, inv, false, r_opp, 0.0, cfg) == -r_opp - 0.25 * 2.0);
  CHECK(reward_hybrid(dpnl, inv, false, r_opp, 1.0, cfg) == r_self - 0.25 * 2.0);
  CHECK(reward_hybrid(dpnl, inv, false, r_opp, 0.5, cfg) == 0.5 * r_self - 0.5 * r_opp);
}

TEST_CASE("hybrid rejects omega outside [0, 1]") {
  const RewardConfig cfg;
  CHECK_THROWS_AS(reward_hybrid(1.0, 0, false, 0.0, -0.01, cfg), ContractViolation);
  CHECK_THROWS_AS(reward_hybrid(1.0, 0, false, 0.0, 1.01, cfg), ContractViolation);
}

TEST_CASE("negative coefficients are rejected") {
  RewardConfig cfg;
  cfg.zeta = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

}  // TEST_SUITE
