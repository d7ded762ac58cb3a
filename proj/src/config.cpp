#include "mmsim/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mmsim/errors.hpp"
#include "mmsim/format.hpp"

namespace mmsim {
namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

/// Typed, path-aware accessor over one JSON object.
class Section {
 public:
  Section(const json& node, std::string path, std::set<std::string> allowed)
      : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_, "expected an object");
    for (const auto& [key, _] : node_.items()) {
      if (!allowed.count(key)) throw ConfigError(join(path_, key), "unknown key");
    }
  }

  bool has(const char* key) const { return node_.contains(key) && !node_.at(key).is_null(); }
  const json& at(const char* key) const { return node_.at(key); }
  std::string path(const char* key) const { return join(path_, key); }

  void number(const char* key, double& out) const {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_number()) throw ConfigError(path(key), "expected a number");
    out = v.get<double>();
  }

  void optional_number(const char* key, std::optional<double>& out) const {
    if (!has(key)) return;
    double v = 0.0;
    number(key, v);
    out = v;
  }

  template <typename Int>
  void integer(const char* key, Int& out, long long min_value = 0) const {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_number_integer()) throw ConfigError(path(key), "expected an integer");
    const auto x = v.get<long long>();
    if (x < min_value) {
      throw ConfigError(path(key), "must be >= " + std::to_string(min_value));
    }
    out = static_cast<Int>(x);
  }

  void seed(const char* key, std::uint64_t& out) const {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw ConfigError(path(key), "expected a non-negative integer");
    }
    out = v.get<std::uint64_t>();
  }

  void string(const char* key, std::string& out) const {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_string()) throw ConfigError(path(key), "expected a string");
    out = v.get<std::string>();
  }

  void interval(const char* key, Interval& out) const {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      throw ConfigError(path(key), "expected [low, high]");
    }
    out = {v[0].get<double>(), v[1].get<double>()};
  }

  /// null or absent keeps the default; "unlimited" removes the cap.
  void cap(const char* key, std::int64_t& out) const {
    if (!has(key)) return;
    const json& v = at(key);
    if (v.is_string() && v.get<std::string>() == "unlimited") {
      out = kUnlimitedFill;
      return;
    }
    integer(key, out, 0);
  }

 private:
  const json& node_;
  std::string path_;
};

template <typename Fn>
void rethrow_with_prefix(const std::string& prefix, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    throw ConfigError(join(prefix, e.key()), std::string(e.what()).substr(e.key().size() + 2));
  }
}

void parse_market(const Section& s, MarketParams& m) {
  s.number("mu", m.mu);
  s.number("sigma", m.sigma);
  s.number("lambda", m.lambda_rate);
  s.number("dt", m.dt);
  s.number("alpha", m.alpha);
  s.number("d_max", m.d_max);
  s.cap("max_bid_fill", m.max_bid_fill);
  s.cap("max_ask_fill", m.max_ask_fill);
  s.interval("lambda_bounds", m.lambda_bounds);
  s.interval("sigma_bounds", m.sigma_bounds);
  rethrow_with_prefix("market", [&] { m.validate(); });
}

RosterEntry parse_roster_entry(const json& node, const std::string& path) {
  Section s(node, path, {"role", "label", "policy"});
  RosterEntry e;
  if (!s.has("role")) throw ConfigError(s.path("role"), "required");
  std::string role;
  s.string("role", role);
  rethrow_with_prefix(path, [&] { e.role = role_from_string(role); });
  if (e.role == Role::adversary) {
    throw ConfigError(s.path("role"), "the adversary is set through the scenario's 'adversary'");
  }
  s.string("label", e.label);
  s.string("policy", e.policy);
  return e;
}

ScenarioSpec parse_scenario(const json& node, const std::string& path) {
  Section s(node, path,
            {"name", "roster", "market", "adversary", "episodes", "horizon", "metric_agents",
             "herding_epsilon"});
  ScenarioSpec spec;
  if (!s.has("name")) throw ConfigError(s.path("name"), "required");
  s.string("name", spec.name);
  if (!s.has("roster") || !s.at("roster").is_array()) {
    throw ConfigError(s.path("roster"), "expected an array of participants");
  }
  const json& roster = s.at("roster");
  if (roster.empty() || roster.size() > 2) {
    throw ConfigError(s.path("roster"), "a scenario has one or two quoting participants");
  }
  for (std::size_t i = 0; i < roster.size(); ++i) {
    spec.roster.push_back(parse_roster_entry(roster[i], s.path("roster") + "[" + std::to_string(i) + "]"));
  }
  std::string mode = "fixed";
  s.string("market", mode);
  if (mode == "fixed") {
    spec.mode = MarketMode::fixed;
  } else if (mode == "adversarial") {
    spec.mode = MarketMode::adversarial;
  } else {
    throw ConfigError(s.path("market"), "expected 'fixed' or 'adversarial'");
  }
  s.string("adversary", spec.adversary_policy);
  if (s.has("episodes")) {
    std::size_t n = 0;
    s.integer("episodes", n, 1);
    spec.episodes = n;
  }
  if (s.has("horizon")) {
    std::int64_t h = 0;
    s.integer("horizon", h, 1);
    spec.horizon = h;
  }
  if (s.has("metric_agents")) {
    const json& v = s.at("metric_agents");
    if (!v.is_array()) throw ConfigError(s.path("metric_agents"), "expected an array of labels");
    for (const auto& x : v) {
      if (!x.is_string()) throw ConfigError(s.path("metric_agents"), "expected labels");
      spec.metric_agents.push_back(x.get<std::string>());
    }
    if (spec.metric_agents.empty() || spec.metric_agents.size() > 2) {
      throw ConfigError(s.path("metric_agents"), "one agent or a pair");
    }
  }
  s.optional_number("herding_epsilon", spec.herding_epsilon);
  if (spec.herding_epsilon && !(*spec.herding_epsilon > 0.0)) {
    throw ConfigError(s.path("herding_epsilon"), "must be > 0");
  }
  return spec;
}

json interval_json(const Interval& i) { return json::array({i.low, i.high}); }

json cap_json(std::int64_t cap) {
  return cap == kUnlimitedFill ? json("unlimited") : json(cap);
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

ObservationScaling FullConfig::observation_scaling() const {
  const MarketParams& m = environment.market;
  const std::int64_t cap = std::min(m.max_bid_fill, m.max_ask_fill);
  const double cap_scale = cap == kUnlimitedFill || cap == 0 ? 1.0 : static_cast<double>(cap);
  ObservationScaling s;
  s.price_scale = scaling.price_scale.value_or(environment.initial_price);
  s.cash_scale = scaling.cash_scale.value_or(environment.initial_price);
  s.inventory_scale =
      scaling.inventory_scale.value_or(cap_scale * std::sqrt(static_cast<double>(environment.horizon)));
  return s;
}

FullConfig parse_config(const std::string& text) {
  FullConfig cfg;
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return cfg;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  Section root(doc, "",
               {"version", "market", "environment", "rewards", "benchmark", "training",
                "evaluation", "policies", "scenarios"});
  if (root.has("version")) {
    int version = 0;
    root.integer("version", version, 0);
    if (version != kConfigVersion) {
      throw ConfigError("version", "unsupported config version " + std::to_string(version));
    }
  }
  if (root.has("market")) parse_market(Section(root.at("market"), "market",
                                               {"mu", "sigma", "lambda", "dt", "alpha", "d_max",
                                                "max_bid_fill", "max_ask_fill", "lambda_bounds",
                                                "sigma_bounds"}),
                                       cfg.environment.market);
  if (root.has("environment")) {
    Section s(root.at("environment"), "environment",
              {"initial_price", "horizon", "observation_scaling"});
    s.number("initial_price", cfg.environment.initial_price);
    if (!std::isfinite(cfg.environment.initial_price)) {
      throw ConfigError(s.path("initial_price"), "must be finite");
    }
    s.integer("horizon", cfg.environment.horizon, 1);
    if (s.has("observation_scaling")) {
      Section o(s.at("observation_scaling"), s.path("observation_scaling"),
                {"price_scale", "cash_scale", "inventory_scale"});
      o.optional_number("price_scale", cfg.scaling.price_scale);
      o.optional_number("cash_scale", cfg.scaling.cash_scale);
      o.optional_number("inventory_scale", cfg.scaling.inventory_scale);
      for (const auto& [key, v] : {std::pair{"price_scale", cfg.scaling.price_scale},
                                   std::pair{"cash_scale", cfg.scaling.cash_scale},
                                   std::pair{"inventory_scale", cfg.scaling.inventory_scale}}) {
        if (v && !(*v > 0.0 && std::isfinite(*v))) throw ConfigError(o.path(key), "must be > 0");
      }
    }
  }
  if (root.has("rewards")) {
    Section s(root.at("rewards"), "rewards", {"zeta", "eta", "penalty_coeff"});
    s.number("zeta", cfg.environment.rewards.zeta);
    s.number("eta", cfg.environment.rewards.eta);
    s.number("penalty_coeff", cfg.environment.rewards.penalty_coeff);
    rethrow_with_prefix("rewards", [&] { cfg.environment.rewards.validate(); });
  }
  if (root.has("benchmark")) {
    Section s(root.at("benchmark"), "benchmark", {"base_offset", "inventory_skew"});
    s.number("base_offset", cfg.benchmark.base_offset);
    s.number("inventory_skew", cfg.benchmark.inventory_skew);
    if (!std::isfinite(cfg.benchmark.base_offset) || !std::isfinite(cfg.benchmark.inventory_skew)) {
      throw ConfigError("benchmark", "coefficients must be finite");
    }
  }
  if (root.has("training")) {
    Section s(root.at("training"), "training",
              {"steps_per_rollout", "minibatch_size", "epochs_per_update", "clip_ratio", "gamma",
               "gae_lambda", "entropy_coeff", "value_coeff", "learning_rate", "max_grad_norm",
               "total_updates", "eval_interval", "eval_episodes", "seed", "hidden",
               "initial_log_std", "scale_rewards"});
    TrainConfig& t = cfg.training;
    s.integer("steps_per_rollout", t.steps_per_rollout);
    s.integer("minibatch_size", t.minibatch_size);
    s.integer("epochs_per_update", t.epochs_per_update);
    s.number("clip_ratio", t.clip_ratio);
    s.number("gamma", t.gamma);
    s.number("gae_lambda", t.gae_lambda);
    s.number("entropy_coeff", t.entropy_coeff);
    s.number("value_coeff", t.value_coeff);
    s.number("learning_rate", t.learning_rate);
    s.number("max_grad_norm", t.max_grad_norm);
    s.integer("total_updates", t.total_updates);
    s.integer("eval_interval", t.eval_interval);
    s.integer("eval_episodes", t.eval_episodes);
    s.seed("seed", t.seed);
    s.number("initial_log_std", t.initial_log_std);
    if (s.has("scale_rewards")) {
      if (!s.at("scale_rewards").is_boolean()) {
        throw ConfigError(s.path("scale_rewards"), "expected true or false");
      }
      t.scale_rewards = s.at("scale_rewards").get<bool>();
    }
    if (s.has("hidden")) {
      const json& h = s.at("hidden");
      if (!h.is_array()) throw ConfigError(s.path("hidden"), "expected an array of widths");
      t.hidden.clear();
      for (const auto& w : h) {
        if (!w.is_number_integer() || w.get<long long>() <= 0) {
          throw ConfigError(s.path("hidden"), "widths must be positive integers");
        }
        t.hidden.push_back(w.get<std::size_t>());
      }
    }
    rethrow_with_prefix("training", [&] { t.validate(); });
  }
  if (root.has("evaluation")) {
    Section s(root.at("evaluation"), "evaluation", {"episodes", "herding_epsilon", "seed", "jobs"});
    s.integer("episodes", cfg.evaluation.episodes, 1);
    s.number("herding_epsilon", cfg.evaluation.herding_epsilon);
    if (!(cfg.evaluation.herding_epsilon > 0.0)) {
      throw ConfigError(s.path("herding_epsilon"), "must be > 0");
    }
    s.seed("seed", cfg.evaluation.seed);
    s.integer("jobs", cfg.evaluation.jobs, 1);
  }
  if (root.has("policies")) {
    const json& p = root.at("policies");
    if (!p.is_object()) throw ConfigError("policies", "expected an object");
    for (const auto& [key, value] : p.items()) {
      Role role{};
      try {
        role = role_from_string(key);
      } catch (const ConfigError&) {
        throw ConfigError("policies." + key, "unknown role");
      }
      if (!value.is_string()) throw ConfigError("policies." + key, "expected a policy source");
      cfg.policies[std::string(short_label(role))] = value.get<std::string>();
    }
  }
  if (root.has("scenarios")) {
    const json& list = root.at("scenarios");
    if (!list.is_array()) throw ConfigError("scenarios", "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      cfg.scenarios.push_back(parse_scenario(list[i], "scenarios[" + std::to_string(i) + "]"));
    }
  }
  return cfg;
}

FullConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str());
}

std::string config_json(const FullConfig& cfg) {
  const MarketParams& m = cfg.environment.market;
  const TrainConfig& t = cfg.training;
  json scenarios = json::array();
  for (const auto& s : cfg.scenarios) {
    json roster = json::array();
    for (const auto& e : s.roster) {
      roster.push_back({{"role", std::string(short_label(e.role))},
                        {"label", e.label},
                        {"policy", e.policy}});
    }
    json spec{{"name", s.name},
              {"roster", roster},
              {"market", s.mode == MarketMode::fixed ? "fixed" : "adversarial"},
              {"adversary", s.adversary_policy}};
    spec["metric_agents"] = s.metric_agents.empty() ? json(nullptr) : json(s.metric_agents);
    spec["episodes"] = s.episodes ? json(*s.episodes) : json(nullptr);
    spec["horizon"] = s.horizon ? json(*s.horizon) : json(nullptr);
    spec["herding_epsilon"] = optional_json(s.herding_epsilon);
    scenarios.push_back(spec);
  }
  const json doc{
      {"version", kConfigVersion},
      {"market",
       {{"mu", m.mu},
        {"sigma", m.sigma},
        {"lambda", m.lambda_rate},
        {"dt", m.dt},
        {"alpha", m.alpha},
        {"d_max", m.d_max},
        {"max_bid_fill", cap_json(m.max_bid_fill)},
        {"max_ask_fill", cap_json(m.max_ask_fill)},
        {"lambda_bounds", interval_json(m.lambda_bounds)},
        {"sigma_bounds", interval_json(m.sigma_bounds)}}},
      {"environment",
       {{"initial_price", cfg.environment.initial_price},
        {"horizon", cfg.environment.horizon},
        {"observation_scaling",
         {{"price_scale", optional_json(cfg.scaling.price_scale)},
          {"cash_scale", optional_json(cfg.scaling.cash_scale)},
          {"inventory_scale", optional_json(cfg.scaling.inventory_scale)}}}}},
      {"rewards",
       {{"zeta", cfg.environment.rewards.zeta},
        {"eta", cfg.environment.rewards.eta},
        {"penalty_coeff", cfg.environment.rewards.penalty_coeff}}},
      {"benchmark",
       {{"base_offset", cfg.benchmark.base_offset},
        {"inventory_skew", cfg.benchmark.inventory_skew}}},
      {"training",
       {{"steps_per_rollout", t.steps_per_rollout},
        {"minibatch_size", t.minibatch_size},
        {"epochs_per_update", t.epochs_per_update},
        {"clip_ratio", t.clip_ratio},
        {"gamma", t.gamma},
        {"gae_lambda", t.gae_lambda},
        {"entropy_coeff", t.entropy_coeff},
        {"value_coeff", t.value_coeff},
        {"learning_rate", t.learning_rate},
        {"max_grad_norm", t.max_grad_norm},
        {"total_updates", t.total_updates},
        {"eval_interval", t.eval_interval},
        {"eval_episodes", t.eval_episodes},
        {"seed", t.seed},
        {"hidden", t.hidden},
        {"initial_log_std", t.initial_log_std},
        {"scale_rewards", t.scale_rewards}}},
      {"evaluation",
       {{"episodes", cfg.evaluation.episodes},
        {"herding_epsilon", cfg.evaluation.herding_epsilon},
        {"seed", cfg.evaluation.seed},
        {"jobs", cfg.evaluation.jobs}}},
      {"policies", cfg.policies},
      {"scenarios", scenarios}};
  return doc.dump(2) + "\n";
}

std::string config_hash(const FullConfig& cfg) {
  // Worker count never changes results, so it stays out of the hash.
  FullConfig copy = cfg;
  copy.evaluation.jobs = 1;
  return hex64(fnv1a(config_json(copy)));
}

}  // namespace mmsim
