// mmsim command line: train, eval, replay, plot.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mmsim/checkpoint.hpp"
#include "mmsim/config.hpp"
#include "mmsim/errors.hpp"
#include "mmsim/format.hpp"
#include "mmsim/plots.hpp"
#include "mmsim/scenario.hpp"
#include "mmsim/training.hpp"

namespace fs = std::filesystem;
using namespace mmsim;

namespace {

enum Exit : int { kOk = 0, kFailure = 1, kConfig = 2, kCheckpoint = 3, kNumerical = 4 };

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::optional<std::size_t> episodes;
  std::optional<double> epsilon;
  std::optional<std::size_t> jobs;
};

FullConfig load(const Common& c) { return c.config.empty() ? FullConfig{} : load_config(c.config); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptLogError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int cmd_train(const Common& c, const std::string& stage_name, const std::string& adversary_path,
              const std::string& opponent_path, std::optional<std::size_t> updates) {
  FullConfig cfg = load(c);
  if (c.seed) cfg.training.seed = *c.seed;
  if (updates) cfg.training.total_updates = *updates;
  const Role trainee = role_from_string(stage_name);
  const fs::path ckpt_dir = fs::path(c.out) / "checkpoints";

  StageSpec spec;
  spec.trainee = trainee;
  switch (trainee) {
    case Role::adversary: spec.stage = Stage::adversary_pretrain; break;
    case Role::agent_a: {
      spec.stage = Stage::train_a;
      const fs::path p = adversary_path.empty() ? ckpt_dir / "adversary.ckpt" : fs::path(adversary_path);
      spec.adversary = std::make_shared<const PolicyParams>(load_checkpoint(p));
      break;
    }
    case Role::agent_b1:
    case Role::agent_b2:
    case Role::agent_bstar: {
      spec.stage = Stage::train_b;
      const fs::path p = opponent_path.empty() ? ckpt_dir / "A.ckpt" : fs::path(opponent_path);
      spec.opponent = std::make_shared<const PolicyParams>(load_checkpoint(p));
      break;
    }
    case Role::benchmark:
      throw ConfigError("stage", "the benchmark quoter is not trained");
  }

  StageEnvironment env{cfg.environment, cfg.benchmark, cfg.observation_scaling(), config_hash(cfg)};
  const std::string label(short_label(trainee));
  std::cerr << "training " << label << " (" << to_string(spec.stage) << "), "
            << cfg.training.total_updates << " updates\n";
  TrainingRun run = run_stage(spec, cfg.training, env, [](const CurvePoint& p, const EvalPoint* e) {
    std::cerr << "update " << p.update_index << " mean_reward " << format_double(p.mean_reward);
    if (e) std::cerr << " eval_return " << format_double(e->mean_return);
    std::cerr << '\n';
  });

  fs::create_directories(ckpt_dir);
  fs::create_directories(fs::path(c.out) / "training");
  const fs::path ckpt = ckpt_dir / (label + ".ckpt");
  save_checkpoint(ckpt, run.policy);
  write_text(fs::path(c.out) / "training" / (label + "_curve.csv"), training_curve_csv(run.curve));
  write_text(fs::path(c.out) / "training" / (label + "_eval.csv"), eval_curve_csv(run.evals));
  std::cout << ckpt.string() << '\n';
  return kOk;
}

int cmd_eval(const Common& c, const std::string& scenario_name, bool list,
             const std::string& checkpoints) {
  FullConfig cfg = load(c);
  if (list) {
    for (const auto& s : scenario_catalog(cfg)) std::cout << s.name << '\n';
    return kOk;
  }
  if (scenario_name.empty()) throw ConfigError("scenario", "a scenario name is required");
  const ScenarioSpec scenario = find_scenario(cfg, scenario_name);
  ScenarioRunOptions options;
  options.seed = c.seed.value_or(cfg.evaluation.seed);
  options.episodes = c.episodes;
  options.herding_epsilon = c.epsilon;
  options.jobs = c.jobs.value_or(cfg.evaluation.jobs);
  options.checkpoint_dir = checkpoints.empty() ? fs::path(c.out) / "checkpoints" : fs::path(checkpoints);
  ScenarioResult result = run_scenario(scenario, cfg, options);
  const fs::path dir = fs::path(c.out) / "runs" / scenario.name;
  write_run(result, cfg, dir);
  std::cout << report_table(result.report);
  std::cerr << "wrote " << dir.string() << '\n';
  return kOk;
}

int cmd_replay(const std::string& path) {
  const ReplayResult r = replay(path);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << report_table(r.report);
  if (r.max_deviation) {
    std::cerr << (r.matches_stored ? "matches" : "DIFFERS from") << " report.json (max deviation "
              << format_double(*r.max_deviation) << ")\n";
  }
  return r.matches_stored ? kOk : kFailure;
}

int cmd_plot(const std::string& report_path, const std::string& out) {
  fs::path run_dir = report_path;
  fs::path report_file = run_dir / "report.json";
  if (!fs::is_directory(run_dir)) {
    report_file = run_dir;
    run_dir = run_dir.parent_path();
  }
  const MetricReport report = report_from_json(read_text(report_file));
  std::vector<EpisodeLog> logs;
  const fs::path episodes = run_dir / "episodes";
  if (fs::is_directory(episodes)) {
    std::vector<fs::path> csvs;
    for (const auto& e : fs::directory_iterator(episodes)) {
      if (e.path().extension() == ".csv") csvs.push_back(e.path());
    }
    std::sort(csvs.begin(), csvs.end());
    for (const auto& p : csvs) {
      LoadedEpisode loaded = load_episode(p);
      if (!loaded.checksum_ok) std::cerr << "warning: checksum mismatch in " << p.string() << '\n';
      logs.push_back(std::move(loaded.log));
    }
  }
  const PlotOutput plots = emit_plots(report, logs, out.empty() ? run_dir / "plots" : fs::path(out));
  if (!plots.notice.empty()) std::cerr << plots.notice << '\n';
  for (const auto& f : plots.files) std::cout << f.string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mmsim: multi-agent market-making simulator"};
  app.set_version_flag("--version", std::string(MMSIM_VERSION));
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "JSON config file (defaults when omitted)");
    sub->add_option("--seed", common.seed, "Master seed");
    sub->add_option("--out", common.out, "Output root directory");
  };

  std::string stage;
  std::string adversary_path;
  std::string opponent_path;
  std::optional<std::size_t> updates;
  auto* train = app.add_subcommand("train", "Train one stage: adversary, A, B1, B2 or BStar");
  train->add_option("stage", stage, "Role to train")->required();
  add_common(train);
  train->add_option("--adversary", adversary_path, "Frozen adversary checkpoint (stage A)");
  train->add_option("--opponent", opponent_path, "Frozen opponent checkpoint (B stages)");
  train->add_option("--updates", updates, "Override training.total_updates");

  std::string scenario;
  bool list = false;
  std::string checkpoints;
  auto* eval = app.add_subcommand("eval", "Evaluate a named scenario");
  eval->add_option("scenario", scenario, "Scenario name");
  add_common(eval);
  eval->add_option("--episodes", common.episodes, "Episode count")->check(CLI::PositiveNumber);
  eval->add_option("--epsilon-herding", common.epsilon, "Herding threshold")->check(CLI::PositiveNumber);
  eval->add_option("--jobs", common.jobs, "Worker threads")->check(CLI::PositiveNumber);
  eval->add_option("--checkpoints", checkpoints, "Checkpoint directory (default <out>/checkpoints)");
  eval->add_flag("--list", list, "List the scenario catalog");

  std::string log_path;
  auto* rep = app.add_subcommand("replay", "Recompute metrics from saved logs");
  rep->add_option("log", log_path, "Run directory, episodes directory or episode CSV")->required();

  std::string report_path;
  std::string plot_out;
  auto* plot = app.add_subcommand("plot", "Render SVG charts for a run");
  plot->add_option("report", report_path, "report.json or its run directory")->required();
  plot->add_option("--out", plot_out, "Chart directory (default <run>/plots)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*train) return cmd_train(common, stage, adversary_path, opponent_path, updates);
    if (*eval) return cmd_eval(common, scenario, list, checkpoints);
    if (*rep) return cmd_replay(log_path);
    if (*plot) return cmd_plot(report_path, plot_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << '\n';
    return kCheckpoint;
  } catch (const NumericalFault& e) {
    std::cerr << "numerical fault: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
