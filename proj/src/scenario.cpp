#include "mmsim/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mmsim/checkpoint.hpp"
#include "mmsim/errors.hpp"
#include "mmsim/format.hpp"
#include "mmsim/random.hpp"

#ifndef MMSIM_VERSION
#define MMSIM_VERSION "0.0.0"
#endif

namespace mmsim {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

ScenarioSpec make_scenario(std::string name, std::vector<Role> roles, MarketMode mode) {
  ScenarioSpec s;
  s.name = std::move(name);
  s.mode = mode;
  for (Role r : roles) s.roster.push_back({r, "", ""});
  return s;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptLogError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

/// Labels default to the role's short label; repeated labels get _1, _2, ...
std::vector<std::string> roster_labels(const ScenarioSpec& scenario) {
  std::vector<std::string> labels;
  std::map<std::string, int> count;
  for (const auto& e : scenario.roster) {
    labels.push_back(e.label.empty() ? std::string(short_label(e.role)) : e.label);
    ++count[labels.back()];
  }
  std::map<std::string, int> seen;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (scenario.roster[i].label.empty() && count[labels[i]] > 1) {
      labels[i] += "_" + std::to_string(++seen[labels[i]]);
    }
  }
  return labels;
}

std::string default_source(Role role, const FullConfig& cfg, const std::string& explicit_source) {
  if (!explicit_source.empty()) return explicit_source;
  const auto it = cfg.policies.find(std::string(short_label(role)));
  return it == cfg.policies.end() ? std::string() : it->second;
}

QuotePair parse_fixed_quotes(const std::string& body, const std::string& source) {
  const auto comma = body.find(',');
  if (comma == std::string::npos) {
    throw ConfigError("policy", "expected fixed:<d_bid>,<d_ask>, got '" + source + "'");
  }
  try {
    return {parse_double(body.substr(0, comma)), parse_double(body.substr(comma + 1))};
  } catch (const std::invalid_argument&) {
    throw ConfigError("policy", "expected fixed:<d_bid>,<d_ask>, got '" + source + "'");
  }
}

}  // namespace

std::vector<ScenarioSpec> builtin_scenarios() {
  using R = Role;
  return {
      make_scenario("A_Fix", {R::agent_a}, MarketMode::fixed),
      make_scenario("A_Adversarial", {R::agent_a}, MarketMode::adversarial),
      make_scenario("B1_Fix", {R::agent_b1}, MarketMode::fixed),
      make_scenario("B1_Adversarial", {R::agent_b1}, MarketMode::adversarial),
      make_scenario("A_vs_B1", {R::agent_a, R::agent_b1}, MarketMode::fixed),
      make_scenario("A_vs_B2", {R::agent_a, R::agent_b2}, MarketMode::fixed),
      make_scenario("B1_vs_B1", {R::agent_b1, R::agent_b1}, MarketMode::fixed),
      make_scenario("B1_vs_B2", {R::agent_b1, R::agent_b2}, MarketMode::fixed),
      make_scenario("A_vs_BStar", {R::agent_a, R::agent_bstar}, MarketMode::fixed),
      make_scenario("B1_vs_BStar", {R::agent_b1, R::agent_bstar}, MarketMode::fixed),
  };
}

std::vector<ScenarioSpec> scenario_catalog(const FullConfig& cfg) {
  std::vector<ScenarioSpec> out = builtin_scenarios();
  for (std::size_t i = 0; i < cfg.scenarios.size(); ++i) {
    const ScenarioSpec& user = cfg.scenarios[i];
    const bool clash = std::any_of(out.begin(), out.end(),
                                   [&](const ScenarioSpec& s) { return s.name == user.name; });
    if (clash) {
      throw ConfigError("scenarios[" + std::to_string(i) + "].name",
                        "'" + user.name + "' is already defined");
    }
    out.push_back(user);
  }
  return out;
}

ScenarioSpec find_scenario(const FullConfig& cfg, const std::string& name) {
  for (auto& s : scenario_catalog(cfg)) {
    if (s.name == name) return s;
  }
  throw ConfigError("scenario", "unknown scenario '" + name + "'");
}

std::shared_ptr<const Policy> resolve_policy(const std::string& source, Role role,
                                             const FullConfig& cfg,
                                             const fs::path& checkpoint_dir) {
  const MarketParams& market = cfg.environment.market;
  const ActionKind want = action_kind(role);
  const std::string slot(short_label(role));
  if (source.rfind("fixed:", 0) == 0) {
    if (want != ActionKind::quotes) {
      throw ConfigError("policy", "fixed quotes cannot drive the " + slot + " slot");
    }
    return std::make_shared<FixedOffsetPolicy>(parse_fixed_quotes(source.substr(6), source),
                                               market.d_max);
  }
  if (source == "random") {
    return std::make_shared<RandomUniformPolicy>(action_space_for(role, market));
  }
  if (source == "benchmark") {
    if (want != ActionKind::quotes) {
      throw ConfigError("policy", "the benchmark quoter cannot drive the " + slot + " slot");
    }
    return std::make_shared<BenchmarkPolicy>(cfg.benchmark, market.d_max);
  }
  fs::path path;
  if (source.empty()) {
    path = checkpoint_dir / (slot + ".ckpt");
  } else if (source.rfind("checkpoint:", 0) == 0) {
    path = source.substr(11);
  } else {
    path = source;
  }
  auto params = std::make_shared<const PolicyParams>(load_checkpoint(path));
  if (params->action_space.kind != want) {
    throw ConfigError("policy", "checkpoint " + path.string() + " holds a " +
                                    std::string(to_string(params->role)) + " policy (" +
                                    std::string(to_string(params->action_space.kind)) +
                                    ") but the " + slot + " slot needs " +
                                    std::string(to_string(want)));
  }
  return std::make_shared<LearnedPolicy>(std::move(params), role != Role::adversary);
}

std::uint64_t episode_seed(std::uint64_t master_seed, std::size_t episode) {
  return derive_seed(master_seed, episode);
}

EnvironmentSpec scenario_environment(const ScenarioSpec& scenario, const FullConfig& cfg,
                                     const ScenarioRunOptions& options,
                                     std::vector<PolicyRecord>* records) {
  if (scenario.roster.empty() || scenario.roster.size() > 2) {
    throw ConfigError("roster", "a scenario has one or two quoting participants");
  }
  EnvironmentSpec spec;
  spec.config = cfg.environment;
  if (scenario.horizon) spec.config.horizon = *scenario.horizon;
  spec.scenario = scenario.name;
  spec.config_hash = config_hash(cfg);
  spec.herding_epsilon = options.herding_epsilon.value_or(
      scenario.herding_epsilon.value_or(cfg.evaluation.herding_epsilon));
  if (!(spec.herding_epsilon > 0.0)) throw ConfigError("herding_epsilon", "must be > 0");

  const auto labels = roster_labels(scenario);
  for (std::size_t i = 0; i < scenario.roster.size(); ++i) {
    const RosterEntry& e = scenario.roster[i];
    const std::string source = default_source(e.role, cfg, e.policy);
    AgentSlot slot;
    slot.role = e.role;
    slot.label = labels[i];
    slot.policy = resolve_policy(source, e.role, cfg, options.checkpoint_dir);
    if (records) records->push_back({slot.label, source, slot.policy->describe()});
    spec.agents.push_back(std::move(slot));
  }
  if (scenario.mode == MarketMode::adversarial) {
    const std::string source = default_source(Role::adversary, cfg, scenario.adversary_policy);
    auto adv = resolve_policy(source, Role::adversary, cfg, options.checkpoint_dir);
    if (records) records->push_back({"adversary", source, adv->describe()});
    spec.adversary = std::move(adv);
  }
  spec.metric_agents = scenario.metric_agents.empty() ? labels : scenario.metric_agents;
  return spec;
}

ScenarioResult run_scenario(const ScenarioSpec& scenario, const FullConfig& cfg,
                            const ScenarioRunOptions& options) {
  ScenarioResult result;
  RunManifest& m = result.manifest;
  m.started_at = utc_now();
  m.master_seed = options.seed;
  m.config_hash = config_hash(cfg);
  m.code_version = MMSIM_VERSION;
  m.scenario = scenario.name;
  m.checkpoint_dir = options.checkpoint_dir.generic_string();
  m.episodes = options.episodes.value_or(scenario.episodes.value_or(cfg.evaluation.episodes));
  if (m.episodes == 0) throw ConfigError("episodes", "must be >= 1");

  const EnvironmentSpec spec = scenario_environment(scenario, cfg, options, &m.policies);
  m.herding_epsilon = spec.herding_epsilon;
  for (std::size_t i = 0; i < m.episodes; ++i) m.episode_seeds.push_back(episode_seed(m.master_seed, i));

  result.logs.resize(m.episodes);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      Environment env(spec);
      for (std::size_t i = next++; i < m.episodes; i = next++) {
        env.reset(m.episode_seeds[i], i);
        while (!env.done()) env.step();
        result.logs[i] = env.release_log();
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = m.episodes;
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, m.episodes);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<std::vector<MetricValue>> per_episode;
  per_episode.reserve(result.logs.size());
  for (const auto& log : result.logs) per_episode.push_back(episode_metrics(log));
  result.report = aggregate(per_episode, spec.metric_agents);
  m.finished_at = utc_now();
  return result;
}

std::string manifest_json(const RunManifest& m) {
  json policies = json::array();
  for (const auto& p : m.policies) {
    policies.push_back({{"slot", p.slot}, {"source", p.source}, {"description", p.description}});
  }
  const json doc{{"master_seed", m.master_seed},
                 {"config_hash", m.config_hash},
                 {"code_version", m.code_version},
                 {"scenario", m.scenario},
                 {"episodes", m.episodes},
                 {"herding_epsilon", m.herding_epsilon},
                 {"checkpoint_dir", m.checkpoint_dir},
                 {"episode_seeds", m.episode_seeds},
                 {"policies", policies},
                 {"outputs", m.outputs},
                 {"started_at", m.started_at},
                 {"finished_at", m.finished_at}};
  return doc.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
  RunManifest m;
  try {
    const json doc = json::parse(text);
    m.master_seed = doc.at("master_seed").get<std::uint64_t>();
    m.config_hash = doc.at("config_hash").get<std::string>();
    m.code_version = doc.at("code_version").get<std::string>();
    m.scenario = doc.at("scenario").get<std::string>();
    m.episodes = doc.at("episodes").get<std::size_t>();
    m.herding_epsilon = doc.at("herding_epsilon").get<double>();
    m.checkpoint_dir = doc.at("checkpoint_dir").get<std::string>();
    m.episode_seeds = doc.at("episode_seeds").get<std::vector<std::uint64_t>>();
    for (const auto& p : doc.at("policies")) {
      m.policies.push_back({p.at("slot").get<std::string>(), p.at("source").get<std::string>(),
                            p.at("description").get<std::string>()});
    }
    m.outputs = doc.at("outputs").get<std::vector<std::string>>();
    m.started_at = doc.at("started_at").get<std::string>();
    m.finished_at = doc.at("finished_at").get<std::string>();
  } catch (const json::exception& e) {
    throw CorruptLogError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

void write_run(ScenarioResult& result, const FullConfig& cfg, const fs::path& dir) {
  fs::create_directories(dir / "episodes");
  RunManifest& m = result.manifest;
  m.outputs.clear();
  for (std::size_t i = 0; i < result.logs.size(); ++i) {
    char stem[32];
    std::snprintf(stem, sizeof stem, "episode_%04zu", i);
    save_episode(dir / "episodes", stem, result.logs[i]);
    m.outputs.push_back(std::string("episodes/") + stem + ".csv");
    m.outputs.push_back(std::string("episodes/") + stem + ".json");
  }
  write_file(dir / "report.json", report_json(result.report));
  write_file(dir / "report.txt", report_table(result.report));
  write_file(dir / "config.json", config_json(cfg));
  for (const char* name : {"report.json", "report.txt", "config.json", "manifest.json"}) {
    m.outputs.emplace_back(name);
  }
  write_file(dir / "manifest.json", manifest_json(m));
}

ScenarioResult rerun_from_manifest(const fs::path& manifest_path) {
  const RunManifest m = manifest_from_json(read_file(manifest_path));
  const FullConfig cfg = load_config(manifest_path.parent_path() / "config.json");
  if (config_hash(cfg) != m.config_hash) {
    throw ConfigError("config_hash", "config.json does not match the manifest");
  }
  ScenarioSpec scenario = find_scenario(cfg, m.scenario);
  ScenarioRunOptions options;
  options.seed = m.master_seed;
  options.episodes = m.episodes;
  options.herding_epsilon = m.herding_epsilon;
  options.checkpoint_dir = m.checkpoint_dir;
  // The recorded sources pin every slot, including defaults resolved at the time.
  for (std::size_t i = 0; i < scenario.roster.size() && i < m.policies.size(); ++i) {
    scenario.roster[i].policy = m.policies[i].source;
  }
  if (scenario.mode == MarketMode::adversarial && !m.policies.empty() &&
      m.policies.back().slot == "adversary") {
    scenario.adversary_policy = m.policies.back().source;
  }
  ScenarioResult result = run_scenario(scenario, cfg, options);
  if (result.manifest.episode_seeds != m.episode_seeds) {
    throw ConfigError("episode_seeds", "re-derived seeds differ from the manifest");
  }
  return result;
}

double report_deviation(const MetricReport& a, const MetricReport& b) {
  double worst = 0.0;
  if (a.rows.size() != b.rows.size() || a.episodes != b.episodes) return INFINITY;
  for (const auto& row : a.rows) {
    const MetricSummary* other = b.find(row.name, row.scope);
    if (!other || other->values.size() != row.values.size()) return INFINITY;
    auto diff = [](double x, double y) {
      if (std::isnan(x) && std::isnan(y)) return 0.0;
      return std::fabs(x - y);
    };
    worst = std::max({worst, diff(row.mean, other->mean), diff(row.std, other->std)});
    for (std::size_t i = 0; i < row.values.size(); ++i) {
      worst = std::max(worst, diff(row.values[i], other->values[i]));
    }
  }
  return worst;
}

ReplayResult replay(const fs::path& path) {
  std::vector<fs::path> csvs;
  fs::path run_dir;
  if (fs::is_directory(path)) {
    const fs::path episodes = fs::is_directory(path / "episodes") ? path / "episodes" : path;
    run_dir = episodes == path ? path.parent_path() : path;
    for (const auto& entry : fs::directory_iterator(episodes)) {
      if (entry.path().extension() == ".csv") csvs.push_back(entry.path());
    }
    std::sort(csvs.begin(), csvs.end());
  } else if (fs::exists(path)) {
    csvs.push_back(path);
  } else {
    throw CorruptLogError("no such log: " + path.string());
  }
  if (csvs.empty()) throw CorruptLogError("no episode logs under " + path.string());

  ReplayResult out;
  std::vector<std::vector<MetricValue>> per_episode;
  std::vector<std::string> agents;
  for (const auto& csv : csvs) {
    LoadedEpisode loaded = load_episode(csv);
    if (!loaded.checksum_ok) {
      out.warnings.push_back("checksum mismatch in " + csv.filename().string() +
                             ": the log differs from what was written");
    }
    if (agents.empty()) agents = loaded.log.meta.metric_agents;
    per_episode.push_back(episode_metrics(loaded.log));
  }
  out.report = aggregate(per_episode, agents);

  const fs::path stored = run_dir / "report.json";
  if (csvs.size() > 1 || fs::is_directory(path)) {
    if (!run_dir.empty() && fs::exists(stored)) {
      const MetricReport original = report_from_json(read_file(stored));
      out.max_deviation = report_deviation(out.report, original);
      out.matches_stored = *out.max_deviation <= kReplayTolerance;
      if (!out.matches_stored) {
        out.warnings.push_back("recomputed metrics differ from report.json by " +
                               format_double(*out.max_deviation));
      }
    }
  }
  return out;
}

}  // namespace mmsim
