// config.hpp
// Experiment configuration: YAML file format, command-line style disorder
// strings, and a canonical serialisation used for hashing and manifests.

#pragma once

#include <complex>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "qwalk/coin.hpp"
#include "qwalk/disorder.hpp"
#include "qwalk/ensemble.hpp"
#include "qwalk/moments.hpp"

namespace qwalk {

// Bad configuration values. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class WalkerKind { Quantum1D, Quantum2D, Classical2D };

inline std::string_view to_string(WalkerKind w) {
  switch (w) {
    case WalkerKind::Quantum1D: return "quantum-1d";
    case WalkerKind::Quantum2D: return "quantum-2d";
    case WalkerKind::Classical2D: return "classical-2d";
  }
  return "quantum-2d";
}

inline WalkerKind parse_walker_kind(std::string_view s) {
  if (s == "quantum-1d") return WalkerKind::Quantum1D;
  if (s == "quantum-2d") return WalkerKind::Quantum2D;
  if (s == "classical-2d") return WalkerKind::Classical2D;
  throw ConfigError("unknown walker '" + std::string(s) + "' (quantum-1d, quantum-2d, classical-2d)");
}

inline std::string_view to_string(DisorderMode m) {
  switch (m) {
    case DisorderMode::None: return "none";
    case DisorderMode::Dynamic: return "dynamic";
    case DisorderMode::Static: return "static";
  }
  return "none";
}

inline DisorderMode parse_disorder_mode(std::string_view s) {
  if (s == "none") return DisorderMode::None;
  if (s == "dynamic") return DisorderMode::Dynamic;
  if (s == "static") return DisorderMode::Static;
  throw ConfigError("unknown disorder mode '" + std::string(s) + "' (none, dynamic, static)");
}

struct ExperimentConfig {
  WalkerKind walker = WalkerKind::Quantum2D;
  std::string coin = "grover";                 // preset name, or "custom"
  std::vector<Complex> custom_coin;            // row-major, used when coin == "custom"
  std::vector<Complex> initial;                // empty: preset for the coin
  int steps = 50;
  DisorderMode disorder_mode = DisorderMode::None;
  std::optional<Distribution> distribution;
  double tail_bound = kDefaultTailBound;
  int batch_size = 50;
  int min_realizations = 0;
  int max_realizations = 2000;
  bool convergence = true;
  int t_min = 18;
  int t_max = 50;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::vector<int> snapshots;                  // empty: final step only
  std::optional<SpreadMeasure> measure;        // empty: per-dimension default
  std::string out = "qwalk-out";

  bool operator==(const ExperimentConfig&) const = default;

  int dimension() const { return walker == WalkerKind::Quantum1D ? 1 : 2; }
};

// ---- distributions -------------------------------------------------------

namespace detail {

inline double parse_double(std::string_view key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("parameter '" + std::string(key) + "': not a number: '" + v + "'");
  }
}

inline int parse_int(std::string_view key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return static_cast<int>(i);
  } catch (const std::exception&) {
    throw ConfigError("parameter '" + std::string(key) + "': not an integer: '" + v + "'");
  }
}

// Lookup of named string parameters with a clear error on a missing key.
class ParamTable {
 public:
  void set(std::string key, std::string value) { items_.emplace_back(std::move(key), std::move(value)); }
  const std::string& get(std::string_view kind, std::string_view key) const {
    for (const auto& [k, v] : items_)
      if (k == key) return v;
    throw ConfigError("disorder '" + std::string(kind) + "': missing parameter '" + std::string(key) + "'");
  }
  bool has(std::string_view key) const {
    for (const auto& kv : items_)
      if (kv.first == key) return true;
    return false;
  }
  void check_known(std::string_view kind, std::initializer_list<std::string_view> known) const {
    for (const auto& kv : items_) {
      bool ok = false;
      for (auto k : known) ok = ok || kv.first == k;
      if (!ok) throw ConfigError("disorder '" + std::string(kind) + "': unknown parameter '" + kv.first + "'");
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> items_;
};

inline Distribution make_distribution(std::string_view kind, const ParamTable& t) {
  Distribution d;
  if (kind == "poisson") {
    t.check_known(kind, {"lambda", "eps"});
    d = Poisson{parse_double("lambda", t.get(kind, "lambda"))};
  } else if (kind == "binomial") {
    t.check_known(kind, {"n", "p", "eps"});
    d = Binomial{parse_int("n", t.get(kind, "n")), parse_double("p", t.get(kind, "p"))};
  } else if (kind == "hypergeometric") {
    t.check_known(kind, {"N", "m", "n", "eps"});
    d = Hypergeometric{parse_int("N", t.get(kind, "N")), parse_int("m", t.get(kind, "m")),
                       parse_int("n", t.get(kind, "n"))};
  } else if (kind == "negative_binomial") {
    t.check_known(kind, {"r", "p", "eps"});
    d = NegativeBinomial{parse_int("r", t.get(kind, "r")), parse_double("p", t.get(kind, "p"))};
  } else if (kind == "geometric") {
    t.check_known(kind, {"p", "eps"});
    d = Geometric{parse_double("p", t.get(kind, "p"))};
  } else {
    throw ConfigError("unknown distribution '" + std::string(kind) +
                      "' (poisson, binomial, hypergeometric, negative_binomial, geometric)");
  }
  try {
    detail::validate(d);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return d;
}

}  // namespace detail

// Parameter names and values of a distribution, in canonical order.
inline std::vector<std::pair<std::string, double>> distribution_params(const Distribution& d) {
  return std::visit(
      [](const auto& x) -> std::vector<std::pair<std::string, double>> {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Poisson>) return {{"lambda", x.lambda}};
        else if constexpr (std::is_same_v<T, Binomial>) return {{"n", x.n}, {"p", x.p}};
        else if constexpr (std::is_same_v<T, Hypergeometric>)
          return {{"N", x.population}, {"m", x.successes}, {"n", x.draws}};
        else if constexpr (std::is_same_v<T, NegativeBinomial>) return {{"r", x.r}, {"p", x.p}};
        else return {{"p", x.p}};
      },
      d);
}

struct DisorderArgument {
  std::optional<Distribution> distribution;  // empty for "none"
  std::optional<double> tail_bound;
};

// "poisson:lambda=1", "binomial:n=5,p=0.2", "hypergeometric:N=20,m=5,n=4",
// "negative_binomial:r=1,p=0.5", "geometric:p=0.5" or "none". An optional
// eps=... sets the tail bound used for the truncation radius.
inline DisorderArgument parse_disorder_argument(std::string_view text) {
  if (text == "none") return {};
  const auto colon = text.find(':');
  const std::string kind(text.substr(0, colon));
  detail::ParamTable table;
  if (colon != std::string_view::npos) {
    std::string rest(text.substr(colon + 1));
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError("disorder parameter '" + item + "' is not key=value");
      table.set(item.substr(0, eq), item.substr(eq + 1));
    }
  }
  DisorderArgument out;
  out.distribution = detail::make_distribution(kind, table);
  if (table.has("eps")) out.tail_bound = detail::parse_double("eps", table.get(kind, "eps"));
  return out;
}

inline std::string format_disorder_argument(const Distribution& d) {
  std::ostringstream os;
  os.precision(17);
  os << kind_name(d) << ':';
  bool first = true;
  for (const auto& [k, v] : distribution_params(d)) {
    os << (first ? "" : ",") << k << '=' << v;
    first = false;
  }
  return os.str();
}

// ---- YAML ----------------------------------------------------------------

namespace detail {

template <typename T>
T yaml_as(const YAML::Node& node, std::string_view key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("config key '" + std::string(key) + "' has an invalid value");
  }
}

inline std::vector<Complex> yaml_complex_list(const YAML::Node& node, std::string_view key) {
  if (!node.IsSequence()) throw ConfigError("config key '" + std::string(key) + "' must be a list");
  std::vector<Complex> out;
  for (const auto& item : node) {
    if (item.IsSequence() && item.size() == 2)
      out.emplace_back(yaml_as<double>(item[0], key), yaml_as<double>(item[1], key));
    else if (item.IsScalar())
      out.emplace_back(yaml_as<double>(item, key), 0.0);
    else
      throw ConfigError("config key '" + std::string(key) + "': entries must be numbers or [re, im] pairs");
  }
  return out;
}

inline void check_keys(const YAML::Node& node, std::string_view where, std::initializer_list<std::string_view> known) {
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    bool ok = false;
    for (auto k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("unknown config key '" + std::string(where) + key + "'");
  }
}

inline void emit_complex_list(YAML::Emitter& e, const std::vector<Complex>& v) {
  e << YAML::BeginSeq;
  for (const auto& c : v) e << YAML::Flow << YAML::BeginSeq << c.real() << c.imag() << YAML::EndSeq;
  e << YAML::EndSeq;
}

}  // namespace detail

// Applies the keys present in `root` on top of `cfg`.
inline void apply_yaml(ExperimentConfig& cfg, const YAML::Node& root) {
  using detail::yaml_as;
  if (!root || root.IsNull()) return;
  if (!root.IsMap()) throw ConfigError("config root must be a mapping");
  detail::check_keys(root, "", {"walker", "coin", "initial", "steps", "disorder", "ensemble", "fit", "seed",
                                "threads", "snapshots", "measure", "out"});
  if (root["walker"]) cfg.walker = parse_walker_kind(yaml_as<std::string>(root["walker"], "walker"));
  if (const auto coin = root["coin"]) {
    if (coin.IsScalar()) {
      cfg.coin = yaml_as<std::string>(coin, "coin");
      cfg.custom_coin.clear();
    } else if (coin.IsMap() && coin["custom"]) {
      cfg.coin = "custom";
      cfg.custom_coin = detail::yaml_complex_list(coin["custom"], "coin.custom");
    } else {
      throw ConfigError("config key 'coin' must be a preset name or {custom: [...]}");
    }
  }
  if (root["initial"]) cfg.initial = detail::yaml_complex_list(root["initial"], "initial");
  if (root["steps"]) cfg.steps = yaml_as<int>(root["steps"], "steps");
  if (const auto d = root["disorder"]) {
    if (d.IsScalar()) {
      const auto arg = parse_disorder_argument(yaml_as<std::string>(d, "disorder"));
      cfg.distribution = arg.distribution;
      if (arg.tail_bound) cfg.tail_bound = *arg.tail_bound;
      cfg.disorder_mode = arg.distribution ? DisorderMode::Dynamic : DisorderMode::None;
    } else {
      detail::check_keys(d, "disorder.", {"mode", "tail_bound", "poisson", "binomial", "hypergeometric",
                                          "negative_binomial", "geometric"});
      if (d["tail_bound"]) cfg.tail_bound = yaml_as<double>(d["tail_bound"], "disorder.tail_bound");
      for (const char* kind : {"poisson", "binomial", "hypergeometric", "negative_binomial", "geometric"}) {
        const auto params = d[kind];
        if (!params) continue;
        if (!params.IsMap()) throw ConfigError(std::string("disorder.") + kind + " must be a mapping");
        detail::ParamTable table;
        for (const auto& kv : params) table.set(kv.first.as<std::string>(), kv.second.as<std::string>());
        cfg.distribution = detail::make_distribution(kind, table);
        if (!d["mode"]) cfg.disorder_mode = DisorderMode::Dynamic;
      }
      if (d["mode"]) cfg.disorder_mode = parse_disorder_mode(yaml_as<std::string>(d["mode"], "disorder.mode"));
    }
  }
  if (const auto e = root["ensemble"]) {
    detail::check_keys(e, "ensemble.", {"batch_size", "min_realizations", "max_realizations", "convergence"});
    if (e["batch_size"]) cfg.batch_size = yaml_as<int>(e["batch_size"], "ensemble.batch_size");
    if (e["min_realizations"]) cfg.min_realizations = yaml_as<int>(e["min_realizations"], "ensemble.min_realizations");
    if (e["max_realizations"]) cfg.max_realizations = yaml_as<int>(e["max_realizations"], "ensemble.max_realizations");
    if (e["convergence"]) cfg.convergence = yaml_as<bool>(e["convergence"], "ensemble.convergence");
  }
  if (const auto f = root["fit"]) {
    detail::check_keys(f, "fit.", {"t_min", "t_max"});
    if (f["t_min"]) cfg.t_min = yaml_as<int>(f["t_min"], "fit.t_min");
    if (f["t_max"]) cfg.t_max = yaml_as<int>(f["t_max"], "fit.t_max");
  }
  if (root["seed"]) cfg.seed = yaml_as<std::uint64_t>(root["seed"], "seed");
  if (root["threads"]) cfg.threads = yaml_as<unsigned>(root["threads"], "threads");
  if (root["snapshots"]) cfg.snapshots = yaml_as<std::vector<int>>(root["snapshots"], "snapshots");
  if (root["measure"]) {
    try {
      cfg.measure = parse_spread_measure(yaml_as<std::string>(root["measure"], "measure"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (root["out"]) cfg.out = yaml_as<std::string>(root["out"], "out");
}

inline ExperimentConfig parse_config(std::string_view yaml_text) {
  ExperimentConfig cfg;
  try {
    apply_yaml(cfg, YAML::Load(std::string(yaml_text)));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// Canonical YAML. Every field is written, so parse_config(to_yaml(c)) == c.
inline std::string to_yaml(const ExperimentConfig& cfg) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "walker" << YAML::Value << std::string(to_string(cfg.walker));
  if (cfg.coin == "custom") {
    e << YAML::Key << "coin" << YAML::Value << YAML::BeginMap << YAML::Key << "custom" << YAML::Value;
    detail::emit_complex_list(e, cfg.custom_coin);
    e << YAML::EndMap;
  } else {
    e << YAML::Key << "coin" << YAML::Value << cfg.coin;
  }
  if (!cfg.initial.empty()) {
    e << YAML::Key << "initial" << YAML::Value;
    detail::emit_complex_list(e, cfg.initial);
  }
  e << YAML::Key << "steps" << YAML::Value << cfg.steps;
  e << YAML::Key << "disorder" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "mode" << YAML::Value << std::string(to_string(cfg.disorder_mode));
  e << YAML::Key << "tail_bound" << YAML::Value << cfg.tail_bound;
  if (cfg.distribution) {
    e << YAML::Key << kind_name(*cfg.distribution) << YAML::Value << YAML::Flow << YAML::BeginMap;
    for (const auto& [k, v] : distribution_params(*cfg.distribution)) e << YAML::Key << k << YAML::Value << v;
    e << YAML::EndMap;
  }
  e << YAML::EndMap;
  e << YAML::Key << "ensemble" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "batch_size" << YAML::Value << cfg.batch_size;
  e << YAML::Key << "min_realizations" << YAML::Value << cfg.min_realizations;
  e << YAML::Key << "max_realizations" << YAML::Value << cfg.max_realizations;
  e << YAML::Key << "convergence" << YAML::Value << cfg.convergence;
  e << YAML::EndMap;
  e << YAML::Key << "fit" << YAML::Value << YAML::Flow << YAML::BeginMap;
  e << YAML::Key << "t_min" << YAML::Value << cfg.t_min << YAML::Key << "t_max" << YAML::Value << cfg.t_max;
  e << YAML::EndMap;
  e << YAML::Key << "seed" << YAML::Value << cfg.seed;
  e << YAML::Key << "threads" << YAML::Value << cfg.threads;
  e << YAML::Key << "snapshots" << YAML::Value << YAML::Flow << cfg.snapshots;
  if (cfg.measure) e << YAML::Key << "measure" << YAML::Value << std::string(to_string(*cfg.measure));
  e << YAML::Key << "out" << YAML::Value << cfg.out;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

// 64-bit FNV-1a of the canonical YAML, as 16 hex digits.
inline std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_yaml(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) s[i] = hex[h & 0xf];
  return s;
}

}  // namespace qwalk
