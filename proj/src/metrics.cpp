#include "mmsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <json.hpp>

#include "mmsim/errors.hpp"

namespace mmsim {
namespace {

using nlohmann::json;

void require_agent(const EpisodeLog& log, std::size_t agent) {
  if (log.steps.empty()) throw ContractViolation("metrics need a non-empty episode log");
  if (agent >= log.agents.size()) throw ContractViolation("metrics: agent index out of range");
}

double total_arrivals(const EpisodeLog& log) {
  double n = 0.0;
  for (const auto& s : log.steps) n += static_cast<double>(s.n_arrivals);
  return n;
}

double fill_share(const EpisodeLog& log, std::size_t agent) {
  double fills = 0.0;
  for (const auto& s : log.steps) fills += static_cast<double>(s.agents[agent].fills());
  return fills / (total_arrivals(log) + kMetricGuard);
}

}  // namespace

double mean_of(std::span<const double> xs) noexcept {
  if (xs.empty()) return 0.0;
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double population_std(std::span<const double> xs) noexcept {
  if (xs.empty()) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size()));
}

double sample_std(std::span<const double> xs) noexcept {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

std::vector<double> pnl_path(const EpisodeLog& log, std::size_t agent) {
  require_agent(log, agent);
  std::vector<double> out;
  out.reserve(log.steps.size());
  for (const auto& s : log.steps) {
    const AgentStep& a = s.agents[agent];
    out.push_back(a.cash + static_cast<double>(a.inventory) * s.mid_price);
  }
  return out;
}

std::vector<double> pnl_increments(const EpisodeLog& log, std::size_t agent) {
  auto path = pnl_path(log, agent);
  double previous = 0.0;
  for (double& v : path) {
    const double level = v;
    v = level - previous;
    previous = level;
  }
  return path;
}

AgentMetrics agent_metrics(const EpisodeLog& log, std::size_t agent) {
  require_agent(log, agent);
  AgentMetrics m;
  const auto path = pnl_path(log, agent);
  const auto inc = pnl_increments(log, agent);
  m.pnl_mean = path.back();
  m.pnl_step_mean = mean_of(inc);
  m.pnl_step_std = population_std(inc);
  m.sharpe_ratio = m.pnl_step_mean / (m.pnl_step_std + kMetricGuard);

  std::vector<double> inventory;
  std::vector<double> half_spread;
  std::vector<double> omega;
  for (const auto& s : log.steps) {
    const AgentStep& a = s.agents[agent];
    inventory.push_back(static_cast<double>(a.inventory));
    half_spread.push_back((a.d_bid + a.d_ask) / 2.0);
    omega.push_back(a.omega);
  }
  m.inventory_volatility = population_std(inventory);
  m.quote_aggressiveness = mean_of(half_spread);
  m.market_share = fill_share(log, agent);
  if (log.agents[agent].role == Role::agent_bstar) m.mean_omega = mean_of(omega);
  return m;
}

MarketMetrics market_metrics(const EpisodeLog& log, std::span<const std::size_t> agents) {
  if (agents.empty() || agents.size() > 2) {
    throw ContractViolation("market metrics take one agent or a pair");
  }
  for (std::size_t a : agents) require_agent(log, a);

  MarketMetrics m;
  const double steps = static_cast<double>(log.steps.size());
  double spread_sum = 0.0;
  double union_fills = 0.0;
  m.zero_fill_steps.assign(agents.size(), 0);
  std::vector<double> price_changes;
  double previous_mid = log.meta.initial_price;
  for (const auto& s : log.steps) {
    double spread = 0.0;
    std::int64_t step_fills = 0;
    for (std::size_t k = 0; k < agents.size(); ++k) {
      const AgentStep& a = s.agents[agents[k]];
      spread += a.q_ask - a.q_bid;
      if (a.fills() == 0) ++m.zero_fill_steps[k];
      step_fills += a.fills();
    }
    spread_sum += spread / static_cast<double>(agents.size());
    union_fills += static_cast<double>(step_fills);
    if (step_fills == 0) ++m.zero_fill_steps_union;
    price_changes.push_back(s.mid_price - previous_mid);
    previous_mid = s.mid_price;
  }
  m.avg_spread = spread_sum / steps;
  for (std::size_t a : agents) m.fill_ratio.push_back(fill_share(log, a));
  m.fill_ratio_union = union_fills / (total_arrivals(log) + kMetricGuard);
  m.price_volatility = population_std(price_changes);
  return m;
}

InteractionMetrics interaction_metrics(const EpisodeLog& log, std::size_t a, std::size_t b,
                                       double epsilon) {
  require_agent(log, a);
  require_agent(log, b);
  if (a == b) throw ContractViolation("interaction metrics need two distinct agents");

  InteractionMetrics m;
  double joint_drawdown = 0.0;
  double herding = 0.0;
  double overlap = 0.0;
  double dist_bid = 0.0;
  double dist_ask = 0.0;
  std::vector<double> divergence;
  for (const auto& s : log.steps) {
    const AgentStep& x = s.agents[a];
    const AgentStep& y = s.agents[b];
    if (x.reward < 0.0 && y.reward < 0.0) joint_drawdown += 1.0;
    const double gap_bid = std::fabs(x.q_bid - y.q_bid);
    const double gap_ask = std::fabs(x.q_ask - y.q_ask);
    if (gap_bid < epsilon && gap_ask < epsilon) herding += 1.0;
    if ((x.bid_fills > 0 && y.bid_fills > 0) || (x.ask_fills > 0 && y.ask_fills > 0)) {
      overlap += 1.0;
    }
    dist_bid += gap_bid;
    dist_ask += gap_ask;
    divergence.push_back(static_cast<double>(x.inventory - y.inventory));
  }
  const double steps = static_cast<double>(log.steps.size());
  m.joint_drawdown_ratio = joint_drawdown / steps;
  m.herding_ratio = herding / steps;
  m.fill_overlap_ratio = overlap / steps;
  m.quote_distance_bid = dist_bid / steps;
  m.quote_distance_ask = dist_ask / steps;
  m.inventory_divergence = population_std(divergence);
  return m;
}

std::vector<MetricValue> episode_metrics(const EpisodeLog& log) {
  const auto idx = log.metric_agent_indices();
  if (idx.empty() || idx.size() > 2) {
    throw ContractViolation("an episode reports metrics for one agent or a pair");
  }
  std::vector<AgentMetrics> per_agent;
  for (std::size_t i : idx) per_agent.push_back(agent_metrics(log, i));
  const MarketMetrics market = market_metrics(log, idx);

  std::vector<MetricValue> out;
  const auto& labels = log.meta.metric_agents;
  auto per = [&](const std::string& name, auto getter) {
    for (std::size_t k = 0; k < idx.size(); ++k) {
      out.push_back({name, labels[k], getter(k)});
    }
  };
  per("pnl_mean", [&](std::size_t k) { return per_agent[k].pnl_mean; });
  per("sharpe_ratio", [&](std::size_t k) { return per_agent[k].sharpe_ratio; });
  per("inventory_volatility", [&](std::size_t k) { return per_agent[k].inventory_volatility; });
  per("quote_aggressiveness", [&](std::size_t k) { return per_agent[k].quote_aggressiveness; });
  per("market_share", [&](std::size_t k) { return per_agent[k].market_share; });
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (per_agent[k].mean_omega) out.push_back({"mean_omega", labels[k], *per_agent[k].mean_omega});
  }
  per("pnl_step_mean", [&](std::size_t k) { return per_agent[k].pnl_step_mean; });
  per("pnl_step_std", [&](std::size_t k) { return per_agent[k].pnl_step_std; });
  per("fill_ratio", [&](std::size_t k) { return market.fill_ratio[k]; });
  per("zero_fill_steps",
      [&](std::size_t k) { return static_cast<double>(market.zero_fill_steps[k]); });

  const std::string scope = "market";
  out.push_back({"avg_spread", scope, market.avg_spread});
  out.push_back({"price_volatility", scope, market.price_volatility});
  out.push_back({"fill_ratio", scope, market.fill_ratio_union});
  out.push_back({"zero_fill_steps", scope, static_cast<double>(market.zero_fill_steps_union)});
  if (idx.size() == 2) {
    const InteractionMetrics im =
        interaction_metrics(log, idx[0], idx[1], log.meta.herding_epsilon);
    out.push_back({"joint_drawdown_ratio", scope, im.joint_drawdown_ratio});
    out.push_back({"herding_ratio", scope, im.herding_ratio});
    out.push_back({"inventory_divergence", scope, im.inventory_divergence});
    out.push_back({"quote_distance_bid", scope, im.quote_distance_bid});
    out.push_back({"quote_distance_ask", scope, im.quote_distance_ask});
    out.push_back({"fill_overlap_ratio", scope, im.fill_overlap_ratio});
  }
  return out;
}

const MetricSummary* MetricReport::find(const std::string& name, const std::string& scope) const {
  for (const auto& r : rows) {
    if (r.name == name && r.scope == scope) return &r;
  }
  return nullptr;
}

bool MetricReport::has_metric(const std::string& name) const {
  return std::any_of(rows.begin(), rows.end(), [&](const auto& r) { return r.name == name; });
}

MetricReport aggregate(const std::vector<std::vector<MetricValue>>& episodes,
                       std::vector<std::string> agents) {
  if (episodes.empty()) throw ContractViolation("aggregate needs at least one episode");
  MetricReport report;
  report.episodes = episodes.size();
  report.agents = std::move(agents);
  const auto& first = episodes.front();
  for (std::size_t r = 0; r < first.size(); ++r) {
    MetricSummary row{first[r].name, first[r].scope, 0.0, 0.0, {}};
    for (const auto& ep : episodes) {
      if (ep.size() != first.size() || ep[r].name != row.name || ep[r].scope != row.scope) {
        throw ContractViolation("aggregate: episodes report different metric rows");
      }
      row.values.push_back(ep[r].value);
    }
    // Summing in sorted order makes the statistics independent of episode order.
    std::vector<double> sorted = row.values;
    std::sort(sorted.begin(), sorted.end());
    row.mean = mean_of(sorted);
    row.std = sample_std(sorted);
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string report_json(const MetricReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"name", r.name},
                    {"scope", r.scope},
                    {"mean", r.mean},
                    {"std", r.std},
                    {"values", r.values}});
  }
  const json doc{{"schema_version", 1},
                 {"episodes", report.episodes},
                 {"agents", report.agents},
                 {"metrics", rows}};
  return doc.dump(2) + "\n";
}

MetricReport report_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    MetricReport report;
    report.episodes = doc.at("episodes").get<std::size_t>();
    report.agents = doc.at("agents").get<std::vector<std::string>>();
    for (const auto& r : doc.at("metrics")) {
      report.rows.push_back({r.at("name").get<std::string>(), r.at("scope").get<std::string>(),
                             r.at("mean").get<double>(), r.at("std").get<double>(),
                             r.at("values").get<std::vector<double>>()});
    }
    return report;
  } catch (const json::exception& e) {
    throw CorruptLogError(std::string("metric report: ") + e.what());
  }
}

std::string report_table(const MetricReport& report) {
  auto cell = [](const MetricSummary& s) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.3f ± %.3f", s.mean, s.std);
    return std::string(buf);
  };
  std::vector<std::pair<std::string, std::string>> lines;
  for (std::size_t i = 0; i < report.rows.size();) {
    const std::string& name = report.rows[i].name;
    const std::string& scope = report.rows[i].scope;
    std::string text = cell(report.rows[i]);
    std::size_t j = i + 1;
    if (scope != "market") {
      while (j < report.rows.size() && report.rows[j].name == name &&
             report.rows[j].scope != "market") {
        text += " / " + cell(report.rows[j]);
        ++j;
      }
    }
    std::string label = name;
    if (scope != "market" && name == "mean_omega") label += " (" + scope + ")";
    if (scope == "market" && (name == "fill_ratio" || name == "zero_fill_steps")) {
      label += " (union)";
    }
    lines.emplace_back(label, text);
    i = j;
  }
  std::size_t width = 6;
  for (const auto& l : lines) width = std::max(width, l.first.size());
  std::ostringstream os;
  std::string agents;
  for (const auto& a : report.agents) agents += (agents.empty() ? "" : " / ") + a;
  os << "episodes: " << report.episodes << "   agents: " << agents << '\n';
  os << std::string(width, '-') << "  " << std::string(40, '-') << '\n';
  for (const auto& [label, text] : lines) {
    os << label << std::string(width - label.size(), ' ') << "  " << text << '\n';
  }
  return os.str();
}

}  // namespace mmsim
