#include "mmsim/episode_log.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mmsim/errors.hpp"
#include "mmsim/format.hpp"

namespace mmsim {
namespace {

using nlohmann::json;

constexpr const char* kSchemaPrefix = "# mmsim-episode v";

const std::vector<std::string>& global_columns() {
  static const std::vector<std::string> cols{"step",       "mid_price", "lambda", "sigma",
                                             "n_arrivals", "buys",      "sells"};
  return cols;
}

const std::vector<std::string>& agent_columns() {
  static const std::vector<std::string> cols{"d_bid",     "d_ask",     "q_bid", "q_ask",
                                             "bid_fills", "ask_fills", "inventory",
                                             "cash",      "reward",    "omega"};
  return cols;
}

std::string header_row(const std::vector<AgentInfo>& agents) {
  std::string row;
  for (const auto& c : global_columns()) row += (row.empty() ? "" : ",") + c;
  for (const auto& a : agents) {
    for (const auto& c : agent_columns()) row += "," + a.label + "." + c;
  }
  return row;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::size_t EpisodeLog::agent_index(const std::string& label) const {
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (agents[i].label == label) return i;
  }
  throw ContractViolation("episode log has no agent '" + label + "'");
}

std::vector<std::size_t> EpisodeLog::metric_agent_indices() const {
  std::vector<std::size_t> out;
  for (const auto& label : meta.metric_agents) out.push_back(agent_index(label));
  return out;
}

void write_episode_csv(std::ostream& out, const EpisodeLog& log) {
  out << kSchemaPrefix << kEpisodeSchemaVersion << '\n';
  out << header_row(log.agents) << '\n';
  for (const StepRecord& s : log.steps) {
    if (s.agents.size() != log.agents.size()) {
      throw ContractViolation("step record agent count does not match the roster");
    }
    out << s.step << ',' << format_double(s.mid_price) << ',' << format_double(s.lambda_rate)
        << ',' << format_double(s.sigma) << ',' << s.n_arrivals << ',' << s.buys << ','
        << s.sells;
    for (const AgentStep& a : s.agents) {
      out << ',' << format_double(a.d_bid) << ',' << format_double(a.d_ask) << ','
          << format_double(a.q_bid) << ',' << format_double(a.q_ask) << ',' << a.bid_fills << ','
          << a.ask_fills << ',' << a.inventory << ',' << format_double(a.cash) << ','
          << format_double(a.reward) << ',' << format_double(a.omega);
    }
    out << '\n';
  }
}

std::string episode_csv(const EpisodeLog& log) {
  std::ostringstream os;
  write_episode_csv(os, log);
  return os.str();
}

std::string episode_checksum(const EpisodeLog& log) { return hex64(fnv1a(episode_csv(log))); }

std::string episode_sidecar_json(const EpisodeLog& log) {
  json agents = json::array();
  for (const auto& a : log.agents) {
    agents.push_back({{"label", a.label}, {"role", std::string(to_string(a.role))}});
  }
  const json doc{{"schema_version", kEpisodeSchemaVersion},
                 {"scenario", log.meta.scenario},
                 {"episode_index", log.meta.episode_index},
                 {"seed", log.meta.seed},
                 {"config_hash", log.meta.config_hash},
                 {"initial_price", log.meta.initial_price},
                 {"horizon", log.meta.horizon},
                 {"metric_agents", log.meta.metric_agents},
                 {"herding_epsilon", log.meta.herding_epsilon},
                 {"nonpositive_price_steps", log.meta.nonpositive_price_steps},
                 {"agents", agents},
                 {"rows", log.steps.size()},
                 {"checksum", episode_checksum(log)}};
  return doc.dump(2) + "\n";
}

std::filesystem::path save_episode(const std::filesystem::path& dir, const std::string& stem,
                                   const EpisodeLog& log) {
  std::filesystem::create_directories(dir);
  const auto csv_path = dir / (stem + ".csv");
  const auto json_path = dir / (stem + ".json");
  {
    std::ofstream out(csv_path, std::ios::binary);
    write_episode_csv(out, log);
    if (!out) throw std::runtime_error("failed writing " + csv_path.string());
  }
  {
    std::ofstream out(json_path, std::ios::binary);
    out << episode_sidecar_json(log);
    if (!out) throw std::runtime_error("failed writing " + json_path.string());
  }
  return csv_path;
}

LoadedEpisode load_episode(const std::filesystem::path& csv_path) {
  auto sidecar_path = csv_path;
  sidecar_path.replace_extension(".json");
  std::ifstream side(sidecar_path, std::ios::binary);
  if (!side) throw CorruptLogError("missing sidecar " + sidecar_path.string());

  LoadedEpisode loaded;
  EpisodeLog& log = loaded.log;
  std::size_t rows = 0;
  try {
    const json doc = json::parse(side);
    const int version = doc.at("schema_version").get<int>();
    if (version != kEpisodeSchemaVersion) throw SchemaVersionError(version, kEpisodeSchemaVersion);
    log.meta.scenario = doc.at("scenario").get<std::string>();
    log.meta.episode_index = doc.at("episode_index").get<std::size_t>();
    log.meta.seed = doc.at("seed").get<std::uint64_t>();
    log.meta.config_hash = doc.at("config_hash").get<std::string>();
    log.meta.initial_price = doc.at("initial_price").get<double>();
    log.meta.horizon = doc.at("horizon").get<std::int64_t>();
    log.meta.metric_agents = doc.at("metric_agents").get<std::vector<std::string>>();
    log.meta.herding_epsilon = doc.at("herding_epsilon").get<double>();
    log.meta.nonpositive_price_steps = doc.at("nonpositive_price_steps").get<std::int64_t>();
    for (const auto& a : doc.at("agents")) {
      log.agents.push_back({a.at("label").get<std::string>(),
                            role_from_string(a.at("role").get<std::string>())});
    }
    rows = doc.at("rows").get<std::size_t>();
    loaded.stored_checksum = doc.at("checksum").get<std::string>();
  } catch (const json::exception& e) {
    throw CorruptLogError(sidecar_path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw CorruptLogError(sidecar_path.string() + ": " + e.what());
  }

  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw CorruptLogError("cannot open " + csv_path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind(kSchemaPrefix, 0) != 0) {
    throw CorruptLogError(csv_path.string() + ": missing schema line");
  }
  int version = 0;
  try {
    version = static_cast<int>(parse_int(std::string_view(line).substr(std::strlen(kSchemaPrefix))));
  } catch (const std::invalid_argument&) {
    throw CorruptLogError(csv_path.string() + ": malformed schema line");
  }
  if (version != kEpisodeSchemaVersion) throw SchemaVersionError(version, kEpisodeSchemaVersion);
  if (!std::getline(in, line) || line != header_row(log.agents)) {
    throw CorruptLogError(csv_path.string() + ": header does not match the sidecar roster");
  }

  const std::size_t n_agents = log.agents.size();
  const std::size_t n_fields = global_columns().size() + n_agents * agent_columns().size();
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (in.eof()) {
      // Every row written by write_episode_csv ends in a newline.
      throw CorruptLogError(csv_path.string() + ": truncated row at line " +
                            std::to_string(line_no));
    }
    const auto f = split(line, ',');
    if (f.size() != n_fields) {
      throw CorruptLogError(csv_path.string() + ": line " + std::to_string(line_no) + " has " +
                            std::to_string(f.size()) + " fields, expected " +
                            std::to_string(n_fields));
    }
    try {
      StepRecord s;
      s.step = parse_int(f[0]);
      s.mid_price = parse_double(f[1]);
      s.lambda_rate = parse_double(f[2]);
      s.sigma = parse_double(f[3]);
      s.n_arrivals = parse_int(f[4]);
      s.buys = parse_int(f[5]);
      s.sells = parse_int(f[6]);
      s.agents.resize(n_agents);
      std::size_t k = global_columns().size();
      for (AgentStep& a : s.agents) {
        a.d_bid = parse_double(f[k++]);
        a.d_ask = parse_double(f[k++]);
        a.q_bid = parse_double(f[k++]);
        a.q_ask = parse_double(f[k++]);
        a.bid_fills = parse_int(f[k++]);
        a.ask_fills = parse_int(f[k++]);
        a.inventory = parse_int(f[k++]);
        a.cash = parse_double(f[k++]);
        a.reward = parse_double(f[k++]);
        a.omega = parse_double(f[k++]);
      }
      log.steps.push_back(std::move(s));
    } catch (const std::invalid_argument& e) {
      throw CorruptLogError(csv_path.string() + ": line " + std::to_string(line_no) + ": " +
                            e.what());
    }
  }
  if (log.steps.size() != rows) {
    throw CorruptLogError(csv_path.string() + ": expected " + std::to_string(rows) +
                          " rows, found " + std::to_string(log.steps.size()));
  }
  loaded.checksum_ok = episode_checksum(log) == loaded.stored_checksum;
  return loaded;
}

}  // namespace mmsim
