#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmsim/episode_log.hpp"

namespace mmsim {

/// Guard added to denominators, as in the metric definitions.
inline constexpr double kMetricGuard = 1e-6;

double mean_of(std::span<const double> xs) noexcept;
/// Population standard deviation (divides by n).
double population_std(std::span<const double> xs) noexcept;
/// Sample standard deviation (divides by n - 1); zero for fewer than two values.
double sample_std(std::span<const double> xs) noexcept;

/// Mark-to-market PnL after each step, valued at that step's post-move mid.
std::vector<double> pnl_path(const EpisodeLog& log, std::size_t agent);
/// Step-to-step PnL increments; the first is measured from a flat book.
std::vector<double> pnl_increments(const EpisodeLog& log, std::size_t agent);

struct AgentMetrics {
  double pnl_mean = 0.0;       ///< terminal mark-to-market PnL of the episode
  double pnl_step_mean = 0.0;  ///< mean per-step PnL increment
  double pnl_step_std = 0.0;   ///< population std of the increments
  double sharpe_ratio = 0.0;   ///< pnl_step_mean / (pnl_step_std + 1e-6)
  double inventory_volatility = 0.0;
  double quote_aggressiveness = 0.0;
  double market_share = 0.0;
  std::optional<double> mean_omega;  ///< hybrid agent only
};

/// Throws ContractViolation on an empty log or unknown agent.
AgentMetrics agent_metrics(const EpisodeLog& log, std::size_t agent);

struct MarketMetrics {
  double avg_spread = 0.0;
  std::vector<double> fill_ratio;             ///< per agent in `agents` order
  std::vector<std::int64_t> zero_fill_steps;  ///< per agent
  double fill_ratio_union = 0.0;              ///< all listed agents' fills over arrivals
  std::int64_t zero_fill_steps_union = 0;     ///< steps where none of them filled
  double price_volatility = 0.0;              ///< population std of mid-price changes
};

/// One agent: spread is that agent's q_ask - q_bid. Two agents: the average of
/// their two spreads.
MarketMetrics market_metrics(const EpisodeLog& log, std::span<const std::size_t> agents);

struct InteractionMetrics {
  double joint_drawdown_ratio = 0.0;
  double herding_ratio = 0.0;
  double inventory_divergence = 0.0;
  double quote_distance_bid = 0.0;
  double quote_distance_ask = 0.0;
  double fill_overlap_ratio = 0.0;
};

/// Throws ContractViolation unless `a` and `b` are distinct agents of `log`.
InteractionMetrics interaction_metrics(const EpisodeLog& log, std::size_t a, std::size_t b,
                                       double epsilon);

/// A single named value of one episode. `scope` is an agent label, or
/// "market" for market-level and interaction metrics.
struct MetricValue {
  std::string name;
  std::string scope;
  double value = 0.0;
};

/// Every applicable metric for the log's metric agents, in report row order.
/// A pair adds the interaction family; a single agent does not.
std::vector<MetricValue> episode_metrics(const EpisodeLog& log);

struct MetricSummary {
  std::string name;
  std::string scope;
  double mean = 0.0;
  double std = 0.0;  ///< sample std across episodes
  std::vector<double> values;
};

struct MetricReport {
  std::size_t episodes = 0;
  std::vector<std::string> agents;
  std::vector<MetricSummary> rows;

  const MetricSummary* find(const std::string& name, const std::string& scope) const;
  bool has_metric(const std::string& name) const;
};

/// Mean and sample std per metric across episodes. The statistics do not
/// depend on the order of `episodes`. Throws ContractViolation for zero
/// episodes or mismatched metric rows.
MetricReport aggregate(const std::vector<std::vector<MetricValue>>& episodes,
                       std::vector<std::string> agents = {});

std::string report_json(const MetricReport& report);
MetricReport report_from_json(const std::string& text);
/// Aligned text table; agent-level rows show "mean ± std" per agent separated
/// by " / ".
std::string report_table(const MetricReport& report);

}  // namespace mmsim
