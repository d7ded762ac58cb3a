#include <doctest.h>

#include <cmath>
#include <memory>
#include <variant>

#include "mmsim/errors.hpp"
#include "mmsim/policy.hpp"

using namespace mmsim;

namespace {

PolicyParams fresh(Role role, std::uint64_t seed = 1) {
  Rng rng(seed);
  return make_policy_params(role, MarketParams{}, ObservationScaling{}, {64, 64}, rng);
}

}  // namespace

TEST_SUITE("policy") {

TEST_CASE("role names round-trip and accept aliases") {
  for (Role r : {Role::adversary, Role::agent_a, Role::agent_b1, Role::agent_b2, Role::agent_bstar,
                 Role::benchmark}) {
    CHECK(role_from_string(to_string(r)) == r);
    CHECK(role_from_string(short_label(r)) == r);
  }
  CHECK(role_from_string("B*") == Role::agent_bstar);
  CHECK_THROWS_AS(role_from_string("C3"), ConfigError);
}

TEST_CASE("the adversary observes no private state") {
  MarketState s = MarketState::initial(100.0, 1000, 1);
  s.accounts[0] = {7, -650.0};
  s.step = 250;
  const Observation adv = observe(s, 0, Role::adversary);
  CHECK_FALSE(adv.own.has_value());
  CHECK(adv.time_frac == 0.25);
  const Observation a = observe(s, 0, Role::agent_a);
  REQUIRE(a.own.has_value());
  CHECK(a.own->inventory == 7);
  CHECK(a.own->cash == -650.0);
  CHECK(observation_dim(Role::adversary) == 2);
  CHECK(observation_dim(Role::agent_bstar) == 4);
  CHECK_THROWS_AS(observe(s, 3, Role::agent_a), ContractViolation);
}

TEST_CASE("observation features are scaled") {
  Observation obs{120.0, 0.5, PrivateState{10, -300.0}};
  ObservationScaling sc{100.0, 200.0, 50.0};
  const auto x = observation_features(obs, sc);
  REQUIRE(x.size() == 4);
  CHECK(x[0] == 1.2);
  CHECK(x[1] == 0.5);
  CHECK(x[2] == 0.2);
  CHECK(x[3] == -1.5);
}

TEST_CASE("action boxes per role") {
  const MarketParams p;
  const ActionSpace adv = action_space_for(Role::adversary, p);
  CHECK(adv.kind == ActionKind::market_control);
  CHECK(adv.bounds[0].low == 300.0);
  CHECK(adv.bounds[1].high == 2.0);
  CHECK(action_space_for(Role::agent_bstar, p).dim() == 3);
  CHECK(action_space_for(Role::agent_b2, p).dim() == 2);
}

TEST_CASE("squash is strictly monotone and stays in the box") {
  const ActionSpace space = action_space_for(Role::agent_bstar, MarketParams{});
  double previous = -1.0;
  for (int i = -400; i <= 400; ++i) {
    const double u = i / 20.0;
    const std::vector<double> raw{u, u, u};
    const auto y = squash_action(space, raw);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(y[k] >= space.bounds[k].low);
      CHECK(y[k] <= space.bounds[k].high);
    }
    if (std::fabs(u) < 30) CHECK(y[0] > previous);
    previous = y[0];
  }
}

TEST_CASE("deterministic action ignores the exploration std") {
  PolicyParams p = fresh(Role::agent_a);
  const std::vector<double> x{1.0, 0.3, 0.1, -0.2};
  Rng rng(1);
  const PolicySample before = sample_policy(p, x, rng, true);
  auto params = p.network.parameters();
  const std::size_t n = p.network.log_std().size();
  // log_std is a contiguous block; shift it through the flat vector.
  const double* first = p.network.log_std().data();
  const std::size_t offset = static_cast<std::size_t>(first - params.data());
  for (std::size_t k = 0; k < n; ++k) params[offset + k] += 1.7;
  const PolicySample after = sample_policy(p, x, rng, true);
  CHECK(before.squashed == after.squashed);
}

TEST_CASE("a fresh hybrid policy starts near omega = 0.5") {
  const PolicyParams p = fresh(Role::agent_bstar, 99);
  Rng rng(2);
  for (double t : {0.0, 0.5, 1.0}) {
    const std::vector<double> x{1.0, t, 0.0, 0.0};
    const PolicySample s = sample_policy(p, x, rng, true);
    const auto& q = std::get<QuoteAction>(s.action);
    REQUIRE(q.omega.has_value());
    CHECK(*q.omega > 0.45);
    CHECK(*q.omega < 0.55);
  }
}

TEST_CASE("log-prob matches the diagonal Gaussian density") {
  const std::vector<double> x{0.3, -1.2};
  const std::vector<double> mu{0.1, -1.0};
  const std::vector<double> ls{-0.5, 0.25};
  double expected = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double s = std::exp(ls[i]);
    expected += -0.5 * std::pow((x[i] - mu[i]) / s, 2) - ls[i] - 0.5 * std::log(2 * M_PI);
  }
  CHECK(gaussian_log_prob(x, mu, ls) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("benchmark quoter skews against inventory") {
  const BenchmarkQuoter q;
  const QuotePair flat = q.quote(0, 5.0);
  CHECK(flat.d_bid == 2.0);
  CHECK(flat.d_ask == 2.0);
  const QuotePair longer = q.quote(20, 5.0);
  CHECK(longer.d_bid == doctest::Approx(3.0));
  CHECK(longer.d_ask == doctest::Approx(1.0));
  const QuotePair extreme = q.quote(1000, 5.0);
  CHECK(extreme.d_bid == 5.0);
  CHECK(extreme.d_ask == 0.0);
}

TEST_CASE("scripted policies") {
  Rng rng(1);
  const Observation obs{100.0, 0.0, PrivateState{}};
  const auto fixed = scripted_fixed_offset(1.0, 2.0, 5.0);
  const auto& q = std::get<QuoteAction>(fixed->act(obs, rng));
  CHECK(q.quotes.d_bid == 1.0);
  CHECK(q.quotes.d_ask == 2.0);
  CHECK_THROWS_AS(FixedOffsetPolicy({6.0, 1.0}, 5.0), ConfigError);

  RandomUniformPolicy random(action_space_for(Role::adversary, MarketParams{}));
  for (int i = 0; i < 100; ++i) {
    const auto m = std::get<MarketControl>(random.act(Observation{100.0, 0.0, {}}, rng));
    CHECK(m.lambda_rate >= 300.0);
    CHECK(m.lambda_rate <= 500.0);
    CHECK(m.sigma >= 0.2);
    CHECK(m.sigma <= 2.0);
  }
}

TEST_CASE("non-finite network output is a numerical fault") {
  PolicyParams p = fresh(Role::agent_a);
  p.network.parameters()[0] = std::nan("");
  Rng rng(1);
  const std::vector<double> x{1.0, 0.0, 0.5, 0.5};
  CHECK_THROWS_AS(sample_policy(p, x, rng, false), NumericalFault);
}

}  // TEST_SUITE
