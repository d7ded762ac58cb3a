#include "mmsim/market.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mmsim/errors.hpp"

namespace mmsim {
namespace {

void require(bool ok, const char* key, const char* message) {
  if (!ok) throw ConfigError(key, message);
}

}  // namespace

void MarketParams::validate() const {
  require(std::isfinite(mu), "mu", "must be finite");
  require(std::isfinite(sigma) && sigma >= 0.0, "sigma", "must be finite and >= 0");
  require(std::isfinite(lambda_rate) && lambda_rate >= 0.0, "lambda",
          "must be finite and >= 0");
  require(std::isfinite(dt) && dt > 0.0, "dt", "must be > 0");
  require(std::isfinite(alpha) && alpha > 0.0, "alpha", "must be > 0");
  require(std::isfinite(d_max) && d_max > 0.0, "d_max", "must be > 0");
  require(max_bid_fill >= 0, "max_bid_fill", "must be >= 0");
  require(max_ask_fill >= 0, "max_ask_fill", "must be >= 0");
  require(std::isfinite(lambda_bounds.low) && lambda_bounds.low >= 0.0 &&
              std::isfinite(lambda_bounds.high) && lambda_bounds.low <= lambda_bounds.high,
          "lambda_bounds", "must be a non-empty interval of non-negative rates");
  require(std::isfinite(sigma_bounds.low) && sigma_bounds.low >= 0.0 &&
              std::isfinite(sigma_bounds.high) && sigma_bounds.low <= sigma_bounds.high,
          "sigma_bounds", "must be a non-empty interval of non-negative volatilities");
}

MarketState MarketState::initial(double mid_price, std::int64_t horizon, std::size_t n_agents) {
  if (horizon < 0) throw ContractViolation("horizon must be >= 0");
  MarketState state;
  state.mid_price = mid_price;
  state.horizon = horizon;
  state.accounts.assign(n_agents, Account{});
  return state;
}

double step_price(double mid, const MarketParams& params, double noise) {
  const double next = mid + params.mu * params.dt + params.sigma * noise * std::sqrt(params.dt);
  if (!std::isfinite(next)) {
    throw NumericalFault("mid-price became non-finite (previous " + std::to_string(mid) + ")");
  }
  return next;
}

std::int64_t draw_arrivals(double lambda_rate, double dt, Rng& rng) {
  return rng.poisson(lambda_rate * dt);
}

OrderSplit split_orders(std::int64_t n) {
  if (n < 0) throw ContractViolation("order count must be >= 0");
  const std::int64_t buys = n / 2;
  return {buys, n - buys};
}

double fill_probability(double d, double alpha, double d_max) noexcept {
  if (d < 0.0 || d > d_max) return 0.0;
  return std::exp(-alpha * d);
}

std::vector<std::int64_t> allocate_fills(std::int64_t order_count,
                                         std::span<const double> probabilities,
                                         std::span<const std::int64_t> caps, Rng& rng) {
  if (order_count < 0) throw ContractViolation("order count must be >= 0");
  if (caps.size() != probabilities.size()) {
    throw ContractViolation("allocate_fills: one cap per agent required");
  }
  std::vector<std::int64_t> fills(probabilities.size(), 0);
  double total = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0 && p <= 1.0)) throw ContractViolation("fill probability outside [0, 1]");
    total += p;
  }
  if (total <= 0.0 || order_count == 0) return fills;

  // Categorical draw per order is an exact multinomial sampler.
  for (std::int64_t k = 0; k < order_count; ++k) {
    ++fills[rng.categorical(probabilities, total)];
  }
  for (std::size_t i = 0; i < fills.size(); ++i) {
    fills[i] = std::min(fills[i], caps[i]);
  }
  return fills;
}

Account apply_fills(Account account, std::int64_t bid_fills, std::int64_t ask_fills,
                    double bid_price, double ask_price) noexcept {
  account.inventory += bid_fills - ask_fills;
  account.cash += -static_cast<double>(bid_fills) * bid_price +
                  static_cast<double>(ask_fills) * ask_price;
  return account;
}

double mark_to_market(const Account& account, double mid) noexcept {
  return account.cash + static_cast<double>(account.inventory) * mid;
}

QuotePair clamp_quote(QuotePair quote, double d_max) {
  if (!std::isfinite(quote.d_bid) || !std::isfinite(quote.d_ask)) {
    throw ContractViolation("quote offsets must be finite");
  }
  quote.d_bid = std::clamp(quote.d_bid, 0.0, d_max);
  quote.d_ask = std::clamp(quote.d_ask, 0.0, d_max);
  return quote;
}

StepOutcome advance(MarketState& state, const MarketParams& params,
                    std::span<const QuotePair> quotes, Rng& rng) {
  if (state.finished()) throw ContractViolation("advance called on a finished episode");
  if (quotes.size() != state.accounts.size()) {
    throw ContractViolation("advance: expected one quote per agent");
  }
  for (const QuotePair& q : quotes) {
    if (!(q.d_bid >= 0.0 && q.d_bid <= params.d_max && q.d_ask >= 0.0 &&
          q.d_ask <= params.d_max)) {
      throw ContractViolation("advance: quote offset outside [0, d_max]");
    }
  }

  const std::size_t n_agents = quotes.size();
  StepOutcome out;
  out.mid_before = state.mid_price;
  out.n_arrivals = draw_arrivals(params.lambda_rate, params.dt, rng);
  const OrderSplit split = split_orders(out.n_arrivals);
  out.buys = split.buys;
  out.sells = split.sells;

  std::vector<double> p_bid(n_agents);
  std::vector<double> p_ask(n_agents);
  for (std::size_t i = 0; i < n_agents; ++i) {
    p_bid[i] = fill_probability(quotes[i].d_bid, params.alpha, params.d_max);
    p_ask[i] = fill_probability(quotes[i].d_ask, params.alpha, params.d_max);
  }
  const std::vector<std::int64_t> bid_caps(n_agents, params.max_bid_fill);
  const std::vector<std::int64_t> ask_caps(n_agents, params.max_ask_fill);

  // Buy market orders lift asks; sell market orders hit bids.
  const auto ask_fills = allocate_fills(out.buys, p_ask, ask_caps, rng);
  const auto bid_fills = allocate_fills(out.sells, p_bid, bid_caps, rng);

  out.fills.resize(n_agents);
  for (std::size_t i = 0; i < n_agents; ++i) {
    AgentFill& f = out.fills[i];
    f.bid_fills = bid_fills[i];
    f.ask_fills = ask_fills[i];
    f.bid_price = quotes[i].bid_price(state.mid_price);
    f.ask_price = quotes[i].ask_price(state.mid_price);
    state.accounts[i] = apply_fills(state.accounts[i], f.bid_fills, f.ask_fills, f.bid_price,
                                    f.ask_price);
  }

  state.mid_price = step_price(state.mid_price, params, rng.normal());
  if (state.mid_price <= 0.0) ++state.nonpositive_price_steps;
  out.mid_after = state.mid_price;
  ++state.step;
  return out;
}

}  // namespace mmsim
