#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "mmsim/random.hpp"

namespace mmsim {

/// Per-step fill cap meaning "no cap".
inline constexpr std::int64_t kUnlimitedFill = std::numeric_limits<std::int64_t>::max();

struct Interval {
  double low = 0.0;
  double high = 0.0;

  bool contains(double x) const noexcept { return x >= low && x <= high; }
  double clamp(double x) const noexcept { return x < low ? low : (x > high ? high : x); }
  double width() const noexcept { return high - low; }
};

/// Environment constants. Defaults are the desk-scale configuration.
struct MarketParams {
  double mu = 0.0;             ///< drift per unit time
  double sigma = 1.1;          ///< volatility per sqrt-time
  double lambda_rate = 400.0;  ///< order arrivals per unit time
  double dt = 0.01;            ///< step duration
  double alpha = 0.5;          ///< fill-probability decay per price unit
  double d_max = 5.0;          ///< widest executable quote offset
  std::int64_t max_bid_fill = 5;
  std::int64_t max_ask_fill = 5;
  Interval lambda_bounds{300.0, 500.0};  ///< adversary range for lambda
  Interval sigma_bounds{0.2, 2.0};       ///< adversary range for sigma

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

struct Account {
  std::int64_t inventory = 0;
  double cash = 0.0;

  friend bool operator==(const Account&, const Account&) = default;
};

/// Quote offsets from the mid-price; prices are derived, never stored.
struct QuotePair {
  double d_bid = 0.0;
  double d_ask = 0.0;

  double bid_price(double mid) const noexcept { return mid - d_bid; }
  double ask_price(double mid) const noexcept { return mid + d_ask; }

  friend bool operator==(const QuotePair&, const QuotePair&) = default;
};

struct AgentFill {
  std::int64_t bid_fills = 0;
  std::int64_t ask_fills = 0;
  double bid_price = 0.0;
  double ask_price = 0.0;

  std::int64_t total() const noexcept { return bid_fills + ask_fills; }
  friend bool operator==(const AgentFill&, const AgentFill&) = default;
};

struct OrderSplit {
  std::int64_t buys = 0;
  std::int64_t sells = 0;

  friend bool operator==(const OrderSplit&, const OrderSplit&) = default;
};

/// Everything that happened in one tick.
struct StepOutcome {
  std::int64_t n_arrivals = 0;
  std::int64_t buys = 0;
  std::int64_t sells = 0;
  double mid_before = 0.0;
  double mid_after = 0.0;
  std::vector<AgentFill> fills;  ///< one per agent, same order as accounts

  friend bool operator==(const StepOutcome&, const StepOutcome&) = default;
};

struct MarketState {
  double mid_price = 100.0;
  std::int64_t step = 0;
  std::int64_t horizon = 1000;
  std::vector<Account> accounts;
  /// Steps that ended with a non-positive mid-price. The price is not floored.
  std::int64_t nonpositive_price_steps = 0;

  static MarketState initial(double mid_price, std::int64_t horizon, std::size_t n_agents);

  bool finished() const noexcept { return step >= horizon; }
  double time_fraction() const noexcept {
    return horizon > 0 ? static_cast<double>(step) / static_cast<double>(horizon) : 0.0;
  }
};

/// P + mu dt + sigma noise sqrt(dt), `noise` a standard-normal draw.
/// Throws NumericalFault if the result is not finite.
double step_price(double mid, const MarketParams& params, double noise);

/// Poisson(lambda_rate * dt) arrivals.
std::int64_t draw_arrivals(double lambda_rate, double dt, Rng& rng);

/// buys = floor(n / 2), sells = n - buys.
OrderSplit split_orders(std::int64_t n);

/// exp(-alpha d) inside [0, d_max], zero beyond.
double fill_probability(double d, double alpha, double d_max) noexcept;

/// Multinomial allocation of `order_count` orders over agents weighted by
/// their fill probabilities, then per-agent truncation at `caps`. Truncated
/// orders go unfilled. All-zero probabilities fill nothing.
std::vector<std::int64_t> allocate_fills(std::int64_t order_count,
                                         std::span<const double> probabilities,
                                         std::span<const std::int64_t> caps, Rng& rng);

Account apply_fills(Account account, std::int64_t bid_fills, std::int64_t ask_fills,
                    double bid_price, double ask_price) noexcept;

double mark_to_market(const Account& account, double mid) noexcept;

/// Clamps offsets into [0, d_max]; non-finite offsets are a contract violation.
QuotePair clamp_quote(QuotePair quote, double d_max);

/// One tick: arrivals, split, fill probabilities at the current mid, ask fills
/// from buys and bid fills from sells, accounting, price move, step++.
/// Quotes must already lie in [0, d_max]; `quotes.size()` must equal the
/// number of accounts.
StepOutcome advance(MarketState& state, const MarketParams& params,
                    std::span<const QuotePair> quotes, Rng& rng);

}  // namespace mmsim
