#include "mmsim/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "mmsim/metrics.hpp"

namespace mmsim {
namespace {

namespace fs = std::filesystem;

constexpr double kWidth = 720.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

struct Series {
  std::string label;
  std::vector<double> ys;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

void header(std::ostringstream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(title) << "</text>\n";
}

std::string line_chart(const std::string& title, const std::string& y_label,
                       const std::vector<Series>& series) {
  double lo = INFINITY;
  double hi = -INFINITY;
  std::size_t n = 0;
  for (const auto& s : series) {
    n = std::max(n, s.ys.size());
    for (double y : s.ys) {
      if (!std::isfinite(y)) continue;
      lo = std::min(lo, y);
      hi = std::max(hi, y);
    }
  }
  if (!std::isfinite(lo)) lo = hi = 0.0;
  if (hi - lo < 1e-12) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](std::size_t i) { return kLeft + (n > 1 ? plot_w * i / (n - 1) : 0.0); };
  auto py = [&](double y) { return kTop + plot_h * (hi - y) / (hi - lo); };

  std::ostringstream os;
  header(os, title);
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\""
     << plot_h << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(py(v) + 4)
       << "\" text-anchor=\"end\">" << tick_label(v) << "</text>\n";
    os << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + plot_w << "\" y1=\"" << num(py(v))
       << "\" y2=\"" << num(py(v)) << "\" stroke=\"#ddd\"/>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const std::size_t i = n > 1 ? (n - 1) * k / 4 : 0;
    os << "<text x=\"" << num(px(i)) << "\" y=\"" << kTop + plot_h + 16
       << "\" text-anchor=\"middle\">" << i << "</text>\n";
  }
  os << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
     << "\" text-anchor=\"middle\">step</text>\n";
  os << "<text x=\"16\" y=\"" << kTop + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << kTop + plot_h / 2 << ")\">" << escape(y_label) << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* colour = kPalette[s % std::size(kPalette)];
    os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < series[s].ys.size(); ++i) {
      if (!std::isfinite(series[s].ys[i])) continue;
      os << num(px(i)) << ',' << num(py(series[s].ys[i])) << ' ';
    }
    os << "\"/>\n";
    const double ly = kTop + 14 + 16.0 * s;
    os << "<line x1=\"" << kWidth - kRight + 10 << "\" x2=\"" << kWidth - kRight + 30 << "\" y1=\""
       << ly << "\" y2=\"" << ly << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << kWidth - kRight + 36 << "\" y=\"" << ly + 4 << "\">"
       << escape(series[s].label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

/// One horizontal bar per (metric, scope), scaled within each metric.
std::string bar_chart(const std::string& title, const MetricReport& report) {
  std::map<std::string, double> scale;
  for (const auto& row : report.rows) {
    scale[row.name] = std::max(scale[row.name], std::fabs(row.mean));
  }
  const double row_h = 16.0;
  const double height = kTop + row_h * report.rows.size() + 20.0;
  const double label_w = 260.0;
  const double bar_w = kWidth - label_w - 110.0;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << num(height) << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(title) << "</text>\n";
  const double zero_x = label_w + bar_w / 2;
  os << "<line x1=\"" << zero_x << "\" x2=\"" << zero_x << "\" y1=\"" << kTop - 4 << "\" y2=\""
     << num(height - 16) << "\" stroke=\"#888\"/>\n";
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const MetricSummary& row = report.rows[i];
    const double y = kTop + row_h * i;
    const double s = scale[row.name] > 0.0 ? scale[row.name] : 1.0;
    const double w = std::isfinite(row.mean) ? (bar_w / 2) * row.mean / s : 0.0;
    os << "<text x=\"" << label_w - 6 << "\" y=\"" << num(y + 11) << "\" text-anchor=\"end\">"
       << escape(row.name + " [" + row.scope + "]") << "</text>\n";
    os << "<rect x=\"" << num(w < 0 ? zero_x + w : zero_x) << "\" y=\"" << num(y + 2)
       << "\" width=\"" << num(std::fabs(w)) << "\" height=\"" << row_h - 4 << "\" fill=\""
       << kPalette[0] << "\"/>\n";
    os << "<text x=\"" << label_w + bar_w + 6 << "\" y=\"" << num(y + 11) << "\">"
       << tick_label(row.mean) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

/// Per-step average over episodes of f(log, step).
template <typename F>
std::vector<double> mean_path(const std::vector<EpisodeLog>& logs, F&& f) {
  std::size_t n = 0;
  for (const auto& log : logs) n = std::max(n, log.steps.size());
  std::vector<double> sum(n, 0.0);
  std::vector<double> count(n, 0.0);
  for (const auto& log : logs) {
    for (std::size_t t = 0; t < log.steps.size(); ++t) {
      const double v = f(log, t);
      if (!std::isfinite(v)) continue;
      sum[t] += v;
      count[t] += 1.0;
    }
  }
  for (std::size_t t = 0; t < n; ++t) sum[t] = count[t] > 0 ? sum[t] / count[t] : NAN;
  return sum;
}

void write(const fs::path& path, const std::string& text, PlotOutput& out) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  out.files.push_back(path);
}

}  // namespace

PlotOutput emit_plots(const MetricReport& report, const std::vector<EpisodeLog>& logs,
                      const fs::path& out_dir) {
  PlotOutput out;
  if (logs.empty() || report.episodes == 0) {
    out.notice = "no episodes to plot; no files written";
    return out;
  }
  fs::create_directories(out_dir);
  const EpisodeLog& first = logs.front();
  std::vector<std::string> agents = report.agents;
  if (agents.empty()) agents = first.meta.metric_agents;

  std::vector<Series> pnl;
  std::vector<Series> inventory;
  std::vector<Series> omega;
  for (const auto& label : agents) {
    const std::size_t a = first.agent_index(label);
    pnl.push_back({label, mean_path(logs, [a](const EpisodeLog& log, std::size_t t) {
                     const AgentStep& s = log.steps[t].agents[a];
                     return s.cash + static_cast<double>(s.inventory) * log.steps[t].mid_price;
                   })});
    inventory.push_back({label, mean_path(logs, [a](const EpisodeLog& log, std::size_t t) {
                           return static_cast<double>(log.steps[t].agents[a].inventory);
                         })});
    if (first.agents[a].role == Role::agent_bstar) {
      omega.push_back({label, mean_path(logs, [a](const EpisodeLog& log, std::size_t t) {
                         return log.steps[t].agents[a].omega;
                       })});
    }
  }
  write(out_dir / "pnl_curves.svg", line_chart("Mark-to-market PnL (mean over episodes)", "PnL", pnl),
        out);
  write(out_dir / "inventory_paths.svg",
        line_chart("Inventory (mean over episodes)", "inventory", inventory), out);
  if (!omega.empty()) {
    write(out_dir / "omega_trajectory.svg",
          line_chart("Modulation weight omega (mean over episodes)", "omega", omega), out);
  }
  if (agents.size() == 2) {
    const std::size_t a = first.agent_index(agents[0]);
    const std::size_t b = first.agent_index(agents[1]);
    std::vector<Series> dist{
        {"bid", mean_path(logs, [a, b](const EpisodeLog& log, std::size_t t) {
           return std::fabs(log.steps[t].agents[a].q_bid - log.steps[t].agents[b].q_bid);
         })},
        {"ask", mean_path(logs, [a, b](const EpisodeLog& log, std::size_t t) {
           return std::fabs(log.steps[t].agents[a].q_ask - log.steps[t].agents[b].q_ask);
         })}};
    write(out_dir / "quote_distance.svg",
          line_chart("Quote distance " + agents[0] + " vs " + agents[1], "|price gap|", dist), out);
  }
  write(out_dir / "metrics_bar.svg", bar_chart("Metric means (" + first.meta.scenario + ")", report),
        out);
  return out;
}

}  // namespace mmsim
