// qwalk: command-line runner for quantum and classical walk experiments.

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qwalk/commands.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::string> walker, coin, disorder, out, measure, snapshots;
  std::optional<int> steps, t_min, t_max, batch, min_realizations, max_realizations;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool is_static = false;
  bool no_convergence = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "YAML experiment configuration");
  cmd->add_option("--walker", o.walker, "quantum-1d | quantum-2d | classical-2d");
  cmd->add_option("--coin", o.coin, "grover | fourier | hadamard | hadamard2");
  cmd->add_option("--steps", o.steps, "number of time steps");
  cmd->add_option("--disorder", o.disorder, "KIND:PARAMS, e.g. poisson:lambda=1 or none");
  cmd->add_flag("--static", o.is_static, "per-vertex (static) instead of per-step disorder");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--tmin", o.t_min, "first t of the fit window");
  cmd->add_option("--tmax", o.t_max, "last t of the fit window");
  cmd->add_option("--threads", o.threads, "worker threads (0: all cores)");
  cmd->add_option("--snapshots", o.snapshots, "comma-separated snapshot times");
  cmd->add_option("--batch", o.batch, "realizations per batch");
  cmd->add_option("--min-realizations", o.min_realizations, "do not stop before this many realizations");
  cmd->add_option("--max-realizations", o.max_realizations, "realization cap");
  cmd->add_flag("--no-convergence", o.no_convergence, "always run max-realizations");
  cmd->add_option("--measure", o.measure, "spread measure: radial | cartesian");
}

qwalk::ExperimentConfig build_config(const Overrides& o) {
  using namespace qwalk;
  ExperimentConfig cfg = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
  if (o.walker) cfg.walker = parse_walker_kind(*o.walker);
  if (o.coin) {
    cfg.coin = *o.coin;
    cfg.custom_coin.clear();
  }
  if (o.steps) cfg.steps = *o.steps;
  if (o.disorder) {
    const auto arg = parse_disorder_argument(*o.disorder);
    cfg.distribution = arg.distribution;
    if (arg.tail_bound) cfg.tail_bound = *arg.tail_bound;
    cfg.disorder_mode = arg.distribution ? DisorderMode::Dynamic : DisorderMode::None;
  }
  if (o.is_static) {
    if (!cfg.distribution) throw ConfigError("--static needs a disorder distribution");
    cfg.disorder_mode = DisorderMode::Static;
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.out = *o.out;
  if (o.t_min) cfg.t_min = *o.t_min;
  if (o.t_max) cfg.t_max = *o.t_max;
  if (o.threads) cfg.threads = *o.threads;
  if (o.batch) cfg.batch_size = *o.batch;
  if (o.min_realizations) cfg.min_realizations = *o.min_realizations;
  if (o.max_realizations) cfg.max_realizations = *o.max_realizations;
  if (o.no_convergence) cfg.convergence = false;
  if (o.measure) {
    try {
      cfg.measure = parse_spread_measure(*o.measure);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (o.snapshots) {
    cfg.snapshots.clear();
    std::stringstream ss(*o.snapshots);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        cfg.snapshots.push_back(std::stoi(item));
      } catch (const std::exception&) {
        throw ConfigError("bad snapshot time '" + item + "'");
      }
    }
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-time quantum walks with jump-length disorder"};
  app.require_subcommand(1);
  app.set_version_flag("--version", qwalk::kToolVersion);

  Overrides sim, ens, cls, dist;
  auto* simulate = app.add_subcommand("simulate", "single trajectory with probability snapshots");
  auto* ensemble = app.add_subcommand("ensemble", "disorder-averaged sigma(t) and exponent fit");
  auto* classical = app.add_subcommand("classical", "classical random walk baseline");
  auto* distribution = app.add_subcommand("distribution", "pmf table, moments and truncation radius");
  add_common(simulate, sim);
  add_common(ensemble, ens);
  add_common(classical, cls);
  add_common(distribution, dist);

  std::string series;
  int fit_tmin = 18, fit_tmax = 50;
  std::optional<std::string> fit_out;
  auto* fit = app.add_subcommand("fit", "fit the exponent of an existing sigma series");
  fit->add_option("series", series, "CSV with columns t, sigma_mean")->required();
  fit->add_option("--tmin", fit_tmin, "first t of the fit window");
  fit->add_option("--tmax", fit_tmax, "last t of the fit window");
  fit->add_option("--out", fit_out, "directory for summary.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qwalk::kExitConfig;
  }

  using namespace qwalk;
  return run_command(
      [&] {
        if (*simulate) {
          cmd_simulate(build_config(sim), std::cerr);
        } else if (*ensemble) {
          cmd_ensemble(build_config(ens), std::cerr);
        } else if (*classical) {
          auto cfg = build_config(cls);
          if (!cls.walker) cfg.walker = WalkerKind::Classical2D;
          cmd_classical(cfg, std::cerr);
        } else if (*distribution) {
          cmd_distribution(build_config(dist), std::cout);
        } else if (*fit) {
          std::optional<std::filesystem::path> dir;
          if (fit_out) dir = *fit_out;
          cmd_fit(series, fit_tmin, fit_tmax, dir, std::cout);
        }
      },
      std::cerr);
}
