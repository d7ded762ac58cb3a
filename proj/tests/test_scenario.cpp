#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "mmsim/checkpoint.hpp"
#include "mmsim/errors.hpp"
#include "mmsim/plots.hpp"
#include "mmsim/scenario.hpp"
#include "support/temp_dir.hpp"

using namespace mmsim;
namespace fs = std::filesystem;

namespace {

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Scripted stand-ins for every role so no checkpoints are needed.
FullConfig scripted_config() {
  FullConfig cfg = parse_config(R"({
    "environment": {"horizon": 120},
    "evaluation": {"episodes": 6},
    "policies": {"A": "fixed:1.5,1.5", "B1": "benchmark", "B2": "fixed:0.5,0.75",
                 "BStar": "random", "adversary": "random"}
  })");
  return cfg;
}

ScenarioRunOptions options(std::uint64_t seed, std::size_t jobs = 1) {
  ScenarioRunOptions o;
  o.seed = seed;
  o.jobs = jobs;
  return o;
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("the catalog holds exactly the ten named scenarios plus user ones") {
  const auto builtins = builtin_scenarios();
  std::vector<std::string> names;
  for (const auto& s : builtins) names.push_back(s.name);
  CHECK(names == std::vector<std::string>{"A_Fix", "A_Adversarial", "B1_Fix", "B1_Adversarial",
                                          "A_vs_B1", "A_vs_B2", "B1_vs_B1", "B1_vs_B2",
                                          "A_vs_BStar", "B1_vs_BStar"});
  const FullConfig cfg = parse_config(R"({"scenarios": [{"name": "Mine", "roster": [{"role": "B1"}]}]})");
  CHECK(scenario_catalog(cfg).size() == 11);
  CHECK(find_scenario(cfg, "Mine").roster.size() == 1);
  CHECK_THROWS_AS(find_scenario(cfg, "Nope"), ConfigError);
  const FullConfig clash = parse_config(R"({"scenarios": [{"name": "A_Fix", "roster": [{"role": "A"}]}]})");
  CHECK_THROWS_AS(scenario_catalog(clash), ConfigError);
}

TEST_CASE("single-agent runs report agent and market metrics only") {
  const FullConfig cfg = scripted_config();
  const ScenarioResult r = run_scenario(find_scenario(cfg, "A_Fix"), cfg, options(1));
  CHECK(r.report.episodes == 6);
  for (const char* n : {"pnl_mean", "sharpe_ratio", "inventory_volatility", "quote_aggressiveness",
                        "market_share", "avg_spread", "fill_ratio", "zero_fill_steps",
                        "price_volatility"}) {
    CHECK(r.report.has_metric(n));
  }
  for (const char* n : {"joint_drawdown_ratio", "herding_ratio", "inventory_divergence",
                        "quote_distance_bid", "quote_distance_ask", "fill_overlap_ratio"}) {
    CHECK_FALSE(r.report.has_metric(n));
  }
  CHECK(r.report.find("quote_aggressiveness", "A")->mean == 1.5);
}

TEST_CASE("pair runs add the interaction metrics") {
  const FullConfig cfg = scripted_config();
  const ScenarioResult r = run_scenario(find_scenario(cfg, "B1_vs_B1"), cfg, options(2));
  CHECK(r.report.agents == std::vector<std::string>{"B1_1", "B1_2"});
  for (const char* n : {"joint_drawdown_ratio", "herding_ratio", "inventory_divergence",
                        "quote_distance_bid", "quote_distance_ask", "fill_overlap_ratio"}) {
    CHECK(r.report.has_metric(n));
  }
  // Two identical benchmark quoters quote identically at every step.
  CHECK(r.report.find("herding_ratio", "market")->mean > 0.0);
}

TEST_CASE("adversarial scenarios drive lambda and sigma from the adversary") {
  const FullConfig cfg = scripted_config();
  const ScenarioResult r = run_scenario(find_scenario(cfg, "B1_Adversarial"), cfg, options(3));
  std::set<double> lambdas;
  for (const auto& s : r.logs[0].steps) lambdas.insert(s.lambda_rate);
  CHECK(lambdas.size() > 10);
  const ScenarioResult f = run_scenario(find_scenario(cfg, "B1_Fix"), cfg, options(3));
  for (const auto& s : f.logs[0].steps) {
    CHECK(s.lambda_rate == 400.0);
    CHECK(s.sigma == 1.1);
  }
}

TEST_CASE("runs are byte-identical across repeats and worker counts") {
  const FullConfig cfg = scripted_config();
  const ScenarioSpec s = find_scenario(cfg, "A_vs_BStar");
  test::TempDir dir("det");
  ScenarioResult a = run_scenario(s, cfg, options(77, 1));
  ScenarioResult b = run_scenario(s, cfg, options(77, 3));
  write_run(a, cfg, dir / "a");
  write_run(b, cfg, dir / "b");
  for (const auto& rel : a.manifest.outputs) {
    if (rel == "manifest.json") continue;
    CAPTURE(rel);
    CHECK(read(dir / "a" / rel) == read(dir / "b" / rel));
  }
  ScenarioResult c = run_scenario(s, cfg, options(78, 1));
  CHECK(report_json(c.report) != report_json(a.report));
}

TEST_CASE("manifest records what is needed to reproduce the run") {
  const FullConfig cfg = scripted_config();
  test::TempDir dir("manifest");
  ScenarioResult r = run_scenario(find_scenario(cfg, "A_vs_B2"), cfg, options(5));
  write_run(r, cfg, dir.path());
  const RunManifest m = manifest_from_json(read(dir / "manifest.json"));
  CHECK(m.master_seed == 5);
  CHECK(m.scenario == "A_vs_B2");
  CHECK(m.config_hash == config_hash(cfg));
  CHECK(m.episode_seeds.size() == 6);
  CHECK(m.episode_seeds[3] == episode_seed(5, 3));
  CHECK(std::count(m.outputs.begin(), m.outputs.end(), "report.json") == 1);
  CHECK_FALSE(m.started_at.empty());
  CHECK(m.policies.size() == 2);
  CHECK(m.policies[1].source == "fixed:0.5,0.75");

  const ScenarioResult again = rerun_from_manifest(dir / "manifest.json");
  CHECK(report_json(again.report) == report_json(r.report));
  for (std::size_t i = 0; i < r.logs.size(); ++i) {
    CHECK(episode_csv(again.logs[i]) == episode_csv(r.logs[i]));
  }
}

TEST_CASE("replay recomputes the stored report") {
  const FullConfig cfg = scripted_config();
  test::TempDir dir("replay");
  ScenarioResult r = run_scenario(find_scenario(cfg, "B1_vs_B2"), cfg, options(9));
  write_run(r, cfg, dir.path());
  const ReplayResult rep = replay(dir.path());
  CHECK(rep.warnings.empty());
  REQUIRE(rep.max_deviation.has_value());
  CHECK(*rep.max_deviation <= kReplayTolerance);
  CHECK(rep.matches_stored);
  CHECK(report_json(rep.report) == report_json(r.report));
  CHECK(replay(dir / "episodes").matches_stored);
  CHECK(replay(dir / "episodes" / "episode_0002.csv").report.episodes == 1);
}

TEST_CASE("replay flags edited logs and rejects corrupt ones") {
  const FullConfig cfg = scripted_config();
  test::TempDir dir("tamper");
  ScenarioResult r = run_scenario(find_scenario(cfg, "A_vs_B1"), cfg, options(10));
  write_run(r, cfg, dir.path());
  const fs::path csv = dir / "episodes" / "episode_0001.csv";

  EpisodeLog edited = r.logs[1];
  auto& fill = edited.steps[7].agents[0];
  fill.bid_fills = fill.bid_fills == 0 ? 1 : 0;
  std::ofstream(csv, std::ios::trunc) << episode_csv(edited);
  const ReplayResult rep = replay(dir.path());
  CHECK(std::any_of(rep.warnings.begin(), rep.warnings.end(),
                    [](const std::string& w) { return w.find("checksum") != std::string::npos; }));
  CHECK_FALSE(rep.matches_stored);

  const std::string text = episode_csv(r.logs[1]);
  std::ofstream(csv, std::ios::trunc) << text.substr(0, text.size() / 2);
  CHECK_THROWS_AS(replay(dir.path()), CorruptLogError);
}

TEST_CASE("policy sources resolve per slot") {
  FullConfig cfg = scripted_config();
  test::TempDir dir("sources");
  Rng rng(1);
  save_checkpoint(dir / "bstar.ckpt",
                  make_policy_params(Role::agent_bstar, MarketParams{}, ObservationScaling{}, {8}, rng));
  save_checkpoint(dir / "A.ckpt",
                  make_policy_params(Role::agent_a, MarketParams{}, ObservationScaling{}, {8}, rng));

  CHECK(resolve_policy("fixed:1,2", Role::agent_b1, cfg, dir.path())->kind() == ActionKind::quotes);
  CHECK(resolve_policy("random", Role::agent_bstar, cfg, dir.path())->kind() ==
        ActionKind::quotes_with_omega);
  CHECK(resolve_policy("", Role::agent_a, cfg, dir.path())->kind() == ActionKind::quotes);
  CHECK(resolve_policy("checkpoint:" + (dir / "bstar.ckpt").string(), Role::agent_bstar, cfg,
                       dir.path())->kind() == ActionKind::quotes_with_omega);
  // A hybrid checkpoint in a two-action slot, and the reverse.
  CHECK_THROWS_AS(resolve_policy((dir / "bstar.ckpt").string(), Role::agent_b1, cfg, dir.path()), ConfigError);
  CHECK_THROWS_AS(resolve_policy((dir / "A.ckpt").string(), Role::agent_bstar, cfg, dir.path()), ConfigError);
  CHECK_THROWS_AS(resolve_policy("fixed:1,2", Role::adversary, cfg, dir.path()), ConfigError);
  CHECK_THROWS_AS(resolve_policy("fixed:1", Role::agent_a, cfg, dir.path()), ConfigError);
  CHECK_THROWS_AS(resolve_policy("", Role::agent_b2, cfg, dir.path()), CheckpointError);
  CHECK_THROWS_AS(resolve_policy("fixed:9,1", Role::agent_a, cfg, dir.path()), ConfigError);
}

TEST_CASE("plots follow the run's shape") {
  const FullConfig cfg = scripted_config();
  test::TempDir dir("plots");
  const ScenarioResult hybrid = run_scenario(find_scenario(cfg, "B1_vs_BStar"), cfg, options(4));
  const PlotOutput p = emit_plots(hybrid.report, hybrid.logs, dir / "h");
  auto has = [](const PlotOutput& out, const char* name) {
    return std::any_of(out.files.begin(), out.files.end(),
                       [&](const fs::path& f) { return f.filename() == name; });
  };
  CHECK(has(p, "omega_trajectory.svg"));
  CHECK(has(p, "quote_distance.svg"));
  CHECK(has(p, "pnl_curves.svg"));
  CHECK(has(p, "inventory_paths.svg"));
  CHECK(has(p, "metrics_bar.svg"));
  for (const auto& f : p.files) CHECK(read(f).rfind("<svg", 0) == 0);

  const ScenarioResult solo = run_scenario(find_scenario(cfg, "A_Fix"), cfg, options(4));
  const PlotOutput q = emit_plots(solo.report, solo.logs, dir / "s");
  CHECK_FALSE(has(q, "omega_trajectory.svg"));
  CHECK_FALSE(has(q, "quote_distance.svg"));

  const PlotOutput again = emit_plots(hybrid.report, hybrid.logs, dir / "h2");
  for (std::size_t i = 0; i < p.files.size(); ++i) CHECK(read(p.files[i]) == read(again.files[i]));

  const PlotOutput none = emit_plots(MetricReport{}, {}, dir / "empty");
  CHECK(none.files.empty());
  CHECK_FALSE(none.notice.empty());
  CHECK_FALSE(fs::exists(dir / "empty"));
}

}  // TEST_SUITE
