#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "qwalk/commands.hpp"

using namespace qwalk;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("qwalk_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(QWALK_BINARY) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ExperimentConfig random_config(std::mt19937_64& rng) {
  auto pick = [&](int n) { return static_cast<int>(rng() % n); };
  std::uniform_real_distribution<double> u(0.01, 0.99);
  ExperimentConfig c;
  c.walker = std::array{WalkerKind::Quantum1D, WalkerKind::Quantum2D, WalkerKind::Classical2D}[pick(3)];
  c.coin = std::array{"grover", "fourier", "hadamard", "hadamard2"}[pick(4)];
  if (pick(4) == 0) {
    c.coin = "custom";
    c.custom_coin = {Complex(u(rng), -u(rng)), Complex(0.5, 0), Complex(0, 1.0 / 3.0), Complex(u(rng), 0)};
  }
  if (pick(3) == 0) c.initial = {Complex(u(rng), u(rng)), Complex(-u(rng), 0)};
  c.steps = 1 + pick(500);
  const Distribution dists[] = {Poisson{u(rng) * 3}, Binomial{1 + pick(10), u(rng)},
                                Hypergeometric{30, pick(30), 1 + pick(30)}, NegativeBinomial{1 + pick(5), u(rng)},
                                Geometric{u(rng)}};
  if (pick(4) != 0) c.distribution = dists[pick(5)];
  c.disorder_mode = c.distribution ? std::array{DisorderMode::Dynamic, DisorderMode::Static}[pick(2)]
                                   : DisorderMode::None;
  c.tail_bound = std::array{1e-4, 1e-6, 0.0123456789}[pick(3)];
  c.batch_size = 1 + pick(100);
  c.min_realizations = pick(300);
  c.max_realizations = 1 + pick(5000);
  c.convergence = pick(2);
  c.t_min = pick(20);
  c.t_max = c.t_min + 1 + pick(50);
  c.seed = rng();
  c.threads = pick(9);
  for (int i = pick(4); i > 0; --i) c.snapshots.push_back(pick(100));
  if (pick(2)) c.measure = pick(2) ? SpreadMeasure::Radial : SpreadMeasure::Cartesian;
  c.out = "out dir/" + std::to_string(pick(1000));
  return c;
}

ExperimentConfig small_config(const fs::path& out) {
  ExperimentConfig c;
  c.steps = 40;
  c.t_min = 10;
  c.t_max = 40;
  c.out = out.string();
  return c;
}

}  // namespace

// ---- configuration -------------------------------------------------------

TEST(Config, YamlRoundTripProperty) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 300; ++i) {
    const auto c = random_config(rng);
    const auto text = to_yaml(c);
    const auto back = parse_config(text);
    ASSERT_EQ(back, c) << text;
    ASSERT_EQ(to_yaml(back), text);
    ASSERT_EQ(config_hash(back), config_hash(c));
  }
}

TEST(Config, HandWrittenFile) {
  const auto c = parse_config(R"(
walker: quantum-2d
coin: fourier
steps: 60
disorder:
  mode: static
  poisson: {lambda: 0.7}
ensemble: {batch_size: 25, max_realizations: 400}
fit: {t_min: 20, t_max: 60}
seed: 9
)");
  EXPECT_EQ(c.coin, "fourier");
  EXPECT_EQ(c.steps, 60);
  EXPECT_EQ(c.disorder_mode, DisorderMode::Static);
  ASSERT_TRUE(c.distribution);
  EXPECT_EQ(*c.distribution, Distribution(Poisson{0.7}));
  EXPECT_EQ(c.batch_size, 25);
  EXPECT_EQ(c.max_realizations, 400);
  EXPECT_EQ(c.t_min, 20);
  EXPECT_EQ(c.seed, 9u);
}

TEST(Config, DisorderAsString) {
  const auto c = parse_config("disorder: 'geometric:p=0.5,eps=1e-6'\n");
  EXPECT_EQ(c.disorder_mode, DisorderMode::Dynamic);
  EXPECT_EQ(*c.distribution, Distribution(Geometric{0.5}));
  EXPECT_DOUBLE_EQ(c.tail_bound, 1e-6);
}

TEST(Config, RejectsUnknownKeysAndValues) {
  EXPECT_THROW(parse_config("stepz: 3\n"), ConfigError);
  EXPECT_THROW(parse_config("disorder: {poisson: {lambda: 1}, kind: x}\n"), ConfigError);
  EXPECT_THROW(parse_config("walker: quantum-3d\n"), ConfigError);
  EXPECT_THROW(parse_config("steps: many\n"), ConfigError);
  EXPECT_THROW(parse_config("steps: [1\n"), ConfigError);
  EXPECT_THROW(parse_config("measure: polar\n"), ConfigError);
}

TEST(DisorderArgument, ParsesEveryFamily) {
  EXPECT_EQ(*parse_disorder_argument("poisson:lambda=1").distribution, Distribution(Poisson{1.0}));
  EXPECT_EQ(*parse_disorder_argument("binomial:n=5,p=0.2").distribution, Distribution(Binomial{5, 0.2}));
  EXPECT_EQ(*parse_disorder_argument("hypergeometric:N=20,m=5,n=4").distribution,
            Distribution(Hypergeometric{20, 5, 4}));
  EXPECT_EQ(*parse_disorder_argument("negative_binomial:r=1,p=0.5").distribution,
            Distribution(NegativeBinomial{1, 0.5}));
  EXPECT_EQ(*parse_disorder_argument("geometric:p=0.5").distribution, Distribution(Geometric{0.5}));
  EXPECT_FALSE(parse_disorder_argument("none").distribution);
  for (const auto& d : {Distribution(Poisson{0.7}), Distribution(Hypergeometric{20, 5, 4})})
    EXPECT_EQ(*parse_disorder_argument(format_disorder_argument(d)).distribution, d);
}

TEST(DisorderArgument, ErrorsNameTheProblem) {
  auto message = [](const std::string& s) -> std::string {
    try {
      parse_disorder_argument(s);
    } catch (const ConfigError& e) {
      return e.what();
    }
    return {};
  };
  EXPECT_NE(message("poisson:mu=1").find("mu"), std::string::npos);
  EXPECT_NE(message("poisson").find("lambda"), std::string::npos);
  EXPECT_NE(message("binomial:n=five,p=0.2").find("'n'"), std::string::npos);
  EXPECT_NE(message("cauchy:x=1").find("cauchy"), std::string::npos);
  EXPECT_FALSE(message("poisson:lambda").empty());
}

// ---- commands ------------------------------------------------------------

TEST(Simulate, ZeroStepsIsPointMass) {
  auto c = small_config(scratch("sim0"));
  c.steps = 0;
  c.t_min = 0;
  c.t_max = 0;
  std::ostringstream diag;
  cmd_simulate(c, diag);
  const auto rows = read_csv(fs::path(c.out) / "snapshot_t0.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"x", "y", "p"}));
  EXPECT_EQ(rows[1], (std::vector<std::string>{"0", "0", "1"}));
}

TEST(Simulate, CleanSnapshotIsNormalizedAndSymmetric) {
  auto c = small_config(scratch("sim40"));
  c.snapshots = {10, 40};
  std::ostringstream diag;
  cmd_simulate(c, diag);
  for (int t : {10, 40}) {
    const auto rows = read_csv(fs::path(c.out) / ("snapshot_t" + std::to_string(t) + ".csv"));
    std::map<std::pair<int, int>, double> p;
    double total = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const double v = std::stod(rows[i][2]);
      p[{std::stoi(rows[i][0]), std::stoi(rows[i][1])}] = v;
      total += v;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    for (const auto& [site, v] : p) {
      const auto mirror = p.find({site.second, site.first});
      ASSERT_NE(mirror, p.end());
      EXPECT_NEAR(v, mirror->second, 1e-12);
    }
  }
  const auto traj = read_csv(fs::path(c.out) / "trajectory.csv");
  EXPECT_EQ(traj[0], (std::vector<std::string>{"t", "m1", "m2", "sigma", "norm"}));
  EXPECT_EQ(traj.size(), 42u);
  EXPECT_TRUE(fs::exists(fs::path(c.out) / "manifest.json"));
  EXPECT_EQ(parse_config(slurp(fs::path(c.out) / "config.yaml")), c);
}

// Disorder keeps the walker closer to the origin. The radial sigma is not a
// good witness here: the clean Grover mass sits on a thin ring, so its radial
// spread is small, while disorder fills the disc.
TEST(Simulate, DisorderKeepsWalkerNearOrigin) {
  auto clean = small_config(scratch("clean"));
  auto dis = small_config(scratch("dis"));
  dis.disorder_mode = DisorderMode::Dynamic;
  dis.distribution = Poisson{1.0};
  std::ostringstream diag;
  cmd_simulate(clean, diag);
  cmd_simulate(dis, diag);
  const auto a = read_csv(fs::path(clean.out) / "trajectory.csv").back();
  const auto b = read_csv(fs::path(dis.out) / "trajectory.csv").back();
  EXPECT_LT(std::stod(b[1]), std::stod(a[1]));  // m1
  EXPECT_LT(std::stod(b[2]), std::stod(a[2]));  // m2
  clean.measure = dis.measure = SpreadMeasure::Cartesian;
  cmd_simulate(clean, diag);
  cmd_simulate(dis, diag);
  EXPECT_LT(std::stod(read_csv(fs::path(dis.out) / "trajectory.csv").back()[3]),
            std::stod(read_csv(fs::path(clean.out) / "trajectory.csv").back()[3]));
}

TEST(Simulate, OneDimensionalWalk) {
  auto c = small_config(scratch("sim1d"));
  c.walker = WalkerKind::Quantum1D;
  c.coin = "hadamard";
  std::ostringstream diag;
  cmd_simulate(c, diag);
  const auto rows = read_csv(fs::path(c.out) / "snapshot_t40.csv");
  EXPECT_EQ(rows[0], (std::vector<std::string>{"x", "p"}));
  EXPECT_EQ(rows.size(), 82u);
}

TEST(Simulate, CoinDimensionMismatch) {
  auto c = small_config(scratch("mismatch"));
  c.coin = "hadamard2";
  std::ostringstream diag;
  EXPECT_THROW(cmd_simulate(c, diag), ConfigError);
  c.coin = "custom";
  c.custom_coin = {1, 0, 0, 1};
  c.walker = WalkerKind::Quantum1D;
  EXPECT_THROW(cmd_simulate(c, diag), ConfigError);  // no initial state
  c.initial = {1, 0};
  EXPECT_NO_THROW(cmd_simulate(c, diag));
}

TEST(Ensemble, WritesSeriesAndSummary) {
  auto c = small_config(scratch("ens"));
  c.disorder_mode = DisorderMode::Dynamic;
  c.distribution = Poisson{1.0};
  c.batch_size = 10;
  c.max_realizations = 20;
  std::ostringstream diag;
  const auto r = cmd_ensemble(c, diag);
  const auto rows = read_csv(fs::path(c.out) / "sigma.csv");
  EXPECT_EQ(rows[0], (std::vector<std::string>{"t", "sigma_mean", "n_realizations"}));
  EXPECT_EQ(rows.size(), 42u);
  const auto summary = Json::parse(slurp(fs::path(c.out) / "summary.json"));
  EXPECT_DOUBLE_EQ(summary["alpha"].get<double>(), r.fit.alpha);
  const auto manifest = Json::parse(slurp(fs::path(c.out) / "manifest.json"));
  EXPECT_EQ(manifest["seeds"].size(), static_cast<std::size_t>(r.realizations));
  EXPECT_EQ(manifest["config_hash"], config_hash(c));
  EXPECT_EQ(manifest["truncation_radius"], 6);
  // refitting the written series reproduces the summary
  std::ostringstream out;
  const auto refit = cmd_fit(fs::path(c.out) / "sigma.csv", 10, 40, std::nullopt, out);
  EXPECT_NEAR(refit.alpha, r.fit.alpha, 1e-14);
}

TEST(Ensemble, StaticModeWritesNorms) {
  auto c = small_config(scratch("static"));
  c.steps = 20;
  c.t_max = 20;
  c.disorder_mode = DisorderMode::Static;
  c.distribution = Poisson{1.0};
  c.max_realizations = 4;
  c.batch_size = 4;
  std::ostringstream diag;
  cmd_ensemble(c, diag);
  const auto rows = read_csv(fs::path(c.out) / "norms.csv");
  EXPECT_EQ(rows[0], (std::vector<std::string>{"t", "norm_mean"}));
  EXPECT_EQ(rows.size(), 22u);
}

TEST(Ensemble, SummaryMatchesSchema) {
  auto c = small_config(scratch("schema"));
  c.disorder_mode = DisorderMode::Dynamic;
  c.distribution = Binomial{1, 1.0};
  c.batch_size = 2;
  std::ostringstream diag;
  cmd_ensemble(c, diag);
  const auto summary = Json::parse(slurp(fs::path(c.out) / "summary.json"));
  const auto schema = Json::parse(slurp(fs::path(QWALK_DATA_DIR) / "summary.schema.json"));
  for (const auto& key : schema["required"]) EXPECT_TRUE(summary.contains(key.get<std::string>())) << key;
  for (const auto& [key, value] : summary.items()) {
    ASSERT_TRUE(schema["properties"].contains(key)) << key;
    const auto& prop = schema["properties"][key];
    const auto type = prop["type"].get<std::string>();
    if (type == "number") EXPECT_TRUE(value.is_number()) << key;
    if (type == "integer") EXPECT_TRUE(value.is_number_integer()) << key;
    if (type == "boolean") EXPECT_TRUE(value.is_boolean()) << key;
    if (prop.contains("minimum")) EXPECT_GE(value.get<double>(), prop["minimum"].get<double>()) << key;
  }
  EXPECT_TRUE(summary["converged"].get<bool>());
}

TEST(Ensemble, ByteIdenticalReruns) {
  ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  auto a = small_config(scratch("rep_a"));
  a.disorder_mode = DisorderMode::Dynamic;
  a.distribution = Hypergeometric{20, 5, 4};
  a.batch_size = 6;
  a.max_realizations = 18;
  a.convergence = false;
  auto b = a;
  b.out = scratch("rep_b").string();
  b.threads = 3;
  a.threads = 1;
  std::ostringstream diag;
  cmd_ensemble(a, diag);
  cmd_ensemble(b, diag);
  for (const char* f : {"sigma.csv", "summary.json"}) EXPECT_EQ(slurp(fs::path(a.out) / f), slurp(fs::path(b.out) / f));
  // manifest differs only through the config (out and threads)
  auto ma = Json::parse(slurp(fs::path(a.out) / "manifest.json"));
  auto mb = Json::parse(slurp(fs::path(b.out) / "manifest.json"));
  ma.erase("config_hash");
  mb.erase("config_hash");
  EXPECT_EQ(ma, mb);
  EXPECT_EQ(ma["timestamp"], "2023-11-14T22:13:20Z");
  ::unsetenv("SOURCE_DATE_EPOCH");
}

TEST(Classical, CleanRunIsDeterministicSqrtSpreading) {
  auto c = small_config(scratch("classical"));
  c.walker = WalkerKind::Classical2D;
  c.steps = 60;
  c.t_min = 18;
  c.t_max = 50;
  std::ostringstream diag;
  const auto r = cmd_classical(c, diag);
  EXPECT_EQ(r.realizations, 1);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.fit.alpha, 0.5, 0.03);
  const auto rows = read_csv(fs::path(c.out) / "sigma.csv");
  EXPECT_EQ(rows[0].back(), "walker");
  EXPECT_EQ(rows[1].back(), "classical");
}

TEST(Distribution, WritesPmfAndMoments) {
  ExperimentConfig c;
  c.out = scratch("dist").string();
  c.distribution = Poisson{1.0};
  std::ostringstream out;
  cmd_distribution(c, out);
  const auto j = Json::parse(out.str());
  EXPECT_EQ(j["truncation_radius"], 6);
  EXPECT_DOUBLE_EQ(j["mean"].get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(j["fano"].get<double>(), 1.0);
  EXPECT_EQ(read_csv(fs::path(c.out) / "pmf.csv").size(), 8u);
}

TEST(Fit, BundledSeries) {
  std::ostringstream out;
  const auto lin = cmd_fit(fs::path(QWALK_DATA_DIR) / "sigma_linear.csv", 18, 50, std::nullopt, out);
  EXPECT_NEAR(lin.alpha, 1.0, 1e-12);
  EXPECT_NEAR(lin.lsq_error, 0.0, 1e-20);
  const auto dir = scratch("fit");
  const auto sq = cmd_fit(fs::path(QWALK_DATA_DIR) / "sigma_sqrt.csv", 18, 50, dir, out);
  EXPECT_NEAR(sq.alpha, 0.5, 1e-12);
  EXPECT_TRUE(fs::exists(dir / "summary.json"));
}

TEST(Fit, NumberFormattingRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.123456789, -0.0})
    EXPECT_EQ(std::stod(format_number(v)), v);
  Json j;
  j["x"] = 0.1;
  j["n"] = 3;
  EXPECT_EQ(to_json_text(j).find("0.10000000000000001") != std::string::npos, true);
}

// ---- exit codes ------------------------------------------------------------

TEST(ExitCodes, InProcess) {
  std::ostringstream diag;
  EXPECT_EQ(run_command([] {}, diag), kExitOk);
  EXPECT_EQ(run_command([] { throw ConfigError("x"); }, diag), kExitConfig);
  EXPECT_EQ(run_command([] { throw IoError("x"); }, diag), kExitIo);
  EXPECT_EQ(run_command([] { throw FitError("x"); }, diag), kExitNumerical);
  EXPECT_EQ(run_command([] { read_series_csv("/nonexistent/file.csv"); }, diag), kExitIo);
}

TEST(ExitCodes, Binary) {
  const auto dir = scratch("bin");
  const std::string out = " --out '" + dir.string() + "'";
  EXPECT_EQ(run_binary("distribution --disorder poisson:lambda=1" + out), 0);
  EXPECT_EQ(run_binary("distribution --disorder poisson:mu=1" + out), 2);
  EXPECT_EQ(run_binary("simulate --walker quantum-5d" + out), 2);
  EXPECT_EQ(run_binary("simulate --steps 5 --tmin 1 --tmax 5" + out), 0);
  EXPECT_EQ(run_binary("simulate --bogus"), 2);
  EXPECT_EQ(run_binary("fit /nonexistent.csv"), 3);
  EXPECT_EQ(run_binary(std::string("fit ") + QWALK_DATA_DIR + "/sigma_linear.csv --tmin 20 --tmax 20"), 4);
  EXPECT_EQ(run_binary(std::string("fit ") + QWALK_DATA_DIR + "/sigma_linear.csv --tmin 18 --tmax 50"), 0);
  EXPECT_EQ(run_binary("simulate --config /nonexistent.yaml"), 3);
  EXPECT_EQ(run_binary("simulate --out /proc/forbidden/dir --steps 2 --tmin 0 --tmax 2"), 3);
}

TEST(ExitCodes, SchemaMismatchNamesColumn) {
  const auto dir = scratch("badcsv");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.csv") << "time,width\n1,2\n";
  std::ostringstream diag;
  EXPECT_EQ(run_command([&] { read_series_csv(dir / "bad.csv"); }, diag), kExitConfig);
  EXPECT_NE(diag.str().find("sigma_mean"), std::string::npos);
}
