// commands.hpp
// The qwalk subcommands. Each takes a validated configuration, does its work,
// and writes results under cfg.out. run_command() maps failures to the exit
// code contract: 0 ok, 2 configuration, 3 I/O, 4 numerical.

#pragma once

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "qwalk/classical.hpp"
#include "qwalk/coin.hpp"
#include "qwalk/config.hpp"
#include "qwalk/disorder.hpp"
#include "qwalk/ensemble.hpp"
#include "qwalk/fit.hpp"
#include "qwalk/io.hpp"
#include "qwalk/moments.hpp"
#include "qwalk/walker.hpp"

namespace qwalk {

inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitIo = 3, kExitNumerical = 4 };

// UTC ISO-8601 time of the run. SOURCE_DATE_EPOCH pins it for reproducible output.
inline std::string run_timestamp() {
  std::time_t now = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) now = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace detail {

inline CoinKind coin_kind_for(const ExperimentConfig& cfg) {
  CoinKind kind;
  try {
    kind = parse_coin_kind(cfg.coin);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  // On the line "hadamard" means the single-qubit H2.
  if (cfg.dimension() == 1 && kind == CoinKind::Hadamard4) kind = CoinKind::Hadamard2;
  return kind;
}

inline WalkSetup make_walk_setup(const ExperimentConfig& cfg) {
  if (cfg.walker == WalkerKind::Classical2D) throw ConfigError("classical walker has no quantum setup");
  const int coin_dim = 2 * cfg.dimension();
  WalkSetup setup;
  try {
    if (cfg.coin == "custom") {
      setup.coin = make_custom_coin(coin_dim, cfg.custom_coin);
      if (cfg.initial.empty()) throw ConfigError("a custom coin needs an explicit 'initial' coin state");
      setup.initial = cfg.initial;
    } else {
      const auto kind = coin_kind_for(cfg);
      setup.coin = make_coin(kind);
      setup.initial = cfg.initial.empty() ? preset_coin_state(kind) : cfg.initial;
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("coin: ") + e.what());
  }
  if (setup.coin.dimension() != coin_dim)
    throw ConfigError("coin '" + cfg.coin + "' has dimension " + std::to_string(setup.coin.dimension()) + " but " +
                      std::string(to_string(cfg.walker)) + " needs " + std::to_string(coin_dim));
  if (setup.initial.size() != static_cast<std::size_t>(coin_dim))
    throw ConfigError("initial coin state must have " + std::to_string(coin_dim) + " entries");
  if (!(std::abs(squared_norm(setup.initial) - 1.0) <= kNormTolerance))
    throw ConfigError("initial coin state is not normalized");
  setup.steps = cfg.steps;
  setup.mode = cfg.disorder_mode;
  setup.measure = cfg.measure;
  if (cfg.disorder_mode != DisorderMode::None) {
    if (!cfg.distribution) throw ConfigError("disorder mode '" + std::string(to_string(cfg.disorder_mode)) +
                                             "' needs a distribution");
    try {
      setup.disorder = DisorderSpec(*cfg.distribution, cfg.tail_bound);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  return setup;
}

inline EnsembleProtocol make_protocol(const ExperimentConfig& cfg) {
  if (cfg.t_min >= cfg.t_max) throw ConfigError("fit window needs t_min < t_max");
  if (cfg.t_max > cfg.steps) throw ConfigError("steps (" + std::to_string(cfg.steps) + ") must be >= fit t_max (" +
                                               std::to_string(cfg.t_max) + ")");
  if (cfg.batch_size < 1) throw ConfigError("ensemble.batch_size must be >= 1");
  if (cfg.max_realizations < 1) throw ConfigError("ensemble.max_realizations must be >= 1");
  EnsembleProtocol p;
  p.batch_size = cfg.batch_size;
  p.min_realizations = cfg.min_realizations;
  p.max_realizations = cfg.max_realizations;
  p.convergence = cfg.convergence;
  p.master_seed = cfg.seed;
  p.t_min = cfg.t_min;
  p.t_max = cfg.t_max;
  p.threads = cfg.threads;
  return p;
}

inline Json fit_json(const ScalingFit& fit, int n_final, bool converged) {
  Json j;
  j["alpha"] = fit.alpha;
  j["ci95"] = fit.ci95;
  j["lsq_error"] = fit.lsq_error;
  j["t_min"] = fit.t_min;
  j["t_max"] = fit.t_max;
  j["n_final"] = n_final;
  j["converged"] = converged;
  j["intercept"] = fit.intercept;
  return j;
}

inline Json manifest_json(const ExperimentConfig& cfg, std::string_view command) {
  Json m;
  m["tool"] = "qwalk";
  m["version"] = kToolVersion;
  m["command"] = std::string(command);
  m["config_hash"] = config_hash(cfg);
  m["timestamp"] = run_timestamp();
  m["master_seed"] = cfg.seed;
  return m;
}

inline void add_ensemble(Json& m, const EnsembleResult& r) {
  m["realizations"] = r.realizations;
  m["seeds"] = r.seeds;
  Json hist = Json::array();
  for (const auto& h : r.history) hist.push_back({{"realizations", h.realizations}, {"alpha", h.alpha}, {"ci95", h.ci95}});
  m["convergence_history"] = hist;
  m["fit"] = fit_json(r.fit, r.realizations, r.converged);
}

inline void write_common(const ExperimentConfig& cfg, const Json& manifest) {
  const std::filesystem::path dir(cfg.out);
  write_text_file(dir / "config.yaml", to_yaml(cfg));
  write_text_file(dir / "manifest.json", to_json_text(manifest));
}

template <int Dim>
std::string snapshot_csv(const PositionDistribution<Dim>& p) {
  CsvWriter csv(Dim == 2 ? std::vector<std::string>{"x", "y", "p"} : std::vector<std::string>{"x", "p"});
  for_each_site<Dim>(p.radius, [&](const Site<Dim>& s, std::size_t off) {
    if constexpr (Dim == 2) csv.row(s[0], s[1], p.probabilities[off]);
    else csv.row(s[0], p.probabilities[off]);
  });
  return csv.text();
}

template <int Dim>
void simulate_impl(const ExperimentConfig& cfg, const WalkSetup& setup, std::ostream& diag) {
  std::vector<int> snaps = cfg.snapshots.empty() ? std::vector<int>{cfg.steps} : cfg.snapshots;
  for (int s : snaps)
    if (s < 0 || s > cfg.steps) throw ConfigError("snapshot time " + std::to_string(s) + " outside [0, steps]");
  const SpreadMeasure measure = setup.measure.value_or(default_spread_measure<Dim>());
  const std::uint64_t seed = derive_seed(cfg.seed, 0);
  const std::filesystem::path dir(cfg.out);

  WalkerState<Dim> state(setup.initial);
  CsvWriter traj({"t", "m1", "m2", "sigma", "norm"});
  std::vector<std::pair<int, std::string>> files;
  auto observe = [&](const WalkerState<Dim>& s) {
    auto p = position_distribution(s);
    const double norm = p.total();
    if (setup.mode == DisorderMode::Static) p = p.normalized();
    const auto m = spread(p, measure);
    traj.row(s.time(), m.m1, m.m2, m.sigma, norm);
    for (int t : snaps)
      if (t == s.time()) files.emplace_back(t, snapshot_csv(p));
  };
  observe(state);

  Json manifest = manifest_json(cfg, "simulate");
  manifest["seeds"] = std::vector<std::uint64_t>{seed};
  switch (setup.mode) {
    case DisorderMode::None:
      evolve<Dim>(state, setup.coin, CleanShift{}, cfg.steps, observe);
      break;
    case DisorderMode::Dynamic: {
      const auto seq = cfg.steps > 0 ? sample_sequence(*setup.disorder, cfg.steps, seed) : JumpSequence{{}, seed};
      evolve<Dim>(state, setup.coin, std::span<const int>(seq.values), cfg.steps, observe);
      manifest["jumps"] = seq.values;
      break;
    }
    case DisorderMode::Static: {
      auto field = sample_field<Dim>(*setup.disorder, 0, seed);
      evolve<Dim>(state, setup.coin, &field, cfg.steps, observe);
      break;
    }
  }
  if (setup.disorder) manifest["truncation_radius"] = setup.disorder->truncation_radius();
  for (const auto& [t, text] : files) write_text_file(dir / ("snapshot_t" + std::to_string(t) + ".csv"), text);
  write_text_file(dir / "trajectory.csv", traj.text());
  write_common(cfg, manifest);
  diag << "simulate: wrote " << files.size() << " snapshot(s) and trajectory.csv to " << dir.string() << "\n";
}

inline void write_ensemble_outputs(const ExperimentConfig& cfg, const EnsembleResult& r, std::string_view command,
                                   bool classical, std::optional<int> truncation_radius) {
  const std::filesystem::path dir(cfg.out);
  CsvWriter csv(classical ? std::vector<std::string>{"t", "sigma_mean", "n_realizations", "walker"}
                          : std::vector<std::string>{"t", "sigma_mean", "n_realizations"});
  for (std::size_t t = 0; t < r.sigma_mean.size(); ++t) {
    if (classical) csv.row(static_cast<int>(t), r.sigma_mean[t], r.realizations, "classical");
    else csv.row(static_cast<int>(t), r.sigma_mean[t], r.realizations);
  }
  write_text_file(dir / "sigma.csv", csv.text());
  if (cfg.disorder_mode == DisorderMode::Static) {
    CsvWriter norms({"t", "norm_mean"});
    for (std::size_t t = 0; t < r.norm_mean.size(); ++t) norms.row(static_cast<int>(t), r.norm_mean[t]);
    write_text_file(dir / "norms.csv", norms.text());
  }
  write_text_file(dir / "summary.json", to_json_text(fit_json(r.fit, r.realizations, r.converged)));
  Json manifest = manifest_json(cfg, command);
  if (truncation_radius) manifest["truncation_radius"] = *truncation_radius;
  add_ensemble(manifest, r);
  write_common(cfg, manifest);
}

inline void report_fit(std::ostream& diag, const EnsembleResult& r, bool convergence_rule) {
  diag << "alpha = " << format_number(r.fit.alpha) << " +- " << format_number(r.fit.ci95) << " (n = " << r.realizations
       << ")\n";
  if (convergence_rule && !r.converged)
    diag << "warning: fitted exponent did not converge within " << r.realizations << " realizations\n";
}

}  // namespace detail

inline void cmd_simulate(const ExperimentConfig& cfg, std::ostream& diag) {
  if (cfg.steps < 0) throw ConfigError("steps must be >= 0");
  const auto setup = detail::make_walk_setup(cfg);
  if (cfg.dimension() == 1) detail::simulate_impl<1>(cfg, setup, diag);
  else detail::simulate_impl<2>(cfg, setup, diag);
}

inline EnsembleResult cmd_ensemble(const ExperimentConfig& cfg, std::ostream& diag) {
  if (cfg.walker == WalkerKind::Classical2D) throw ConfigError("use 'classical' for the classical walker");
  if (cfg.disorder_mode == DisorderMode::None) throw ConfigError("ensemble needs dynamic or static disorder");
  const auto setup = detail::make_walk_setup(cfg);
  const auto protocol = detail::make_protocol(cfg);
  const auto r = cfg.dimension() == 1 ? ensemble_average<1>(setup, protocol) : ensemble_average<2>(setup, protocol);
  detail::write_ensemble_outputs(cfg, r, "ensemble", false, setup.disorder->truncation_radius());
  detail::report_fit(diag, r, cfg.convergence);
  return r;
}

inline EnsembleResult cmd_classical(const ExperimentConfig& cfg, std::ostream& diag) {
  if (cfg.disorder_mode == DisorderMode::Static) throw ConfigError("classical walker supports dynamic disorder only");
  auto protocol = detail::make_protocol(cfg);
  std::optional<DisorderSpec> spec;
  if (cfg.disorder_mode == DisorderMode::Dynamic) {
    if (!cfg.distribution) throw ConfigError("dynamic disorder needs a distribution");
    try {
      spec = DisorderSpec(*cfg.distribution, cfg.tail_bound);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  } else {
    protocol.max_realizations = 1;  // deterministic
  }
  auto r = classical_ensemble(cfg.steps, spec, protocol, cfg.measure.value_or(SpreadMeasure::Radial));
  if (!spec) r.converged = true;
  std::optional<int> radius;
  if (spec) radius = spec->truncation_radius();
  detail::write_ensemble_outputs(cfg, r, "classical", true, radius);
  detail::report_fit(diag, r, cfg.convergence && spec.has_value());
  return r;
}

// Post-processes an existing series file. Prints the summary to `out` and
// also writes summary.json when out_dir is given.
inline ScalingFit cmd_fit(const std::filesystem::path& series, int t_min, int t_max,
                          const std::optional<std::filesystem::path>& out_dir, std::ostream& out) {
  if (t_min > t_max) throw ConfigError("fit window needs t_min <= t_max");
  const auto table = read_series_csv(series);
  const auto fit = fit_exponent(table.t, table.sigma, t_min, t_max);
  const int n = table.realizations.empty() ? 0 : table.realizations.back();
  const auto text = to_json_text(detail::fit_json(fit, n, true));
  out << text;
  if (out_dir) write_text_file(*out_dir / "summary.json", text);
  return fit;
}

inline void cmd_distribution(const ExperimentConfig& cfg, std::ostream& out) {
  if (!cfg.distribution) throw ConfigError("distribution needs --disorder KIND:PARAMS");
  DisorderSpec spec = [&] {
    try {
      return DisorderSpec(*cfg.distribution, cfg.tail_bound);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }();
  const auto m = exact_moments(spec.distribution());
  CsvWriter csv({"k", "pmf"});
  for (int k = 0; k <= spec.truncation_radius(); ++k) csv.row(k, pmf(spec.distribution(), k));
  Json j;
  j["kind"] = kind_name(spec.distribution());
  Json params;
  for (const auto& [k, v] : distribution_params(spec.distribution())) params[k] = v;
  j["params"] = params;
  j["tail_bound"] = spec.tail_bound();
  j["truncation_radius"] = spec.truncation_radius();
  j["tail_mass"] = tail_probability(spec.distribution(), spec.truncation_radius());
  j["mean"] = m.mean;
  j["variance"] = m.variance;
  j["fano"] = m.fano;
  const std::filesystem::path dir(cfg.out);
  write_text_file(dir / "pmf.csv", csv.text());
  write_text_file(dir / "distribution.json", to_json_text(j));
  out << to_json_text(j);
}

// Runs body() and converts exceptions into the exit code contract.
inline int run_command(const std::function<void()>& body, std::ostream& diag) {
  try {
    body();
    return kExitOk;
  } catch (const ConfigError& e) {
    diag << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    diag << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::ios_base::failure& e) {
    diag << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    diag << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const FitError& e) {
    diag << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    diag << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    diag << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace qwalk
