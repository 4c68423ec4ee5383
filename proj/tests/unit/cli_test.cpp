#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "config.hpp"
#include "property.hpp"
#include "runner.hpp"
#include "ustatlab/error.hpp"

namespace fs = std::filesystem;

namespace ustat::cli {
namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ustatlab_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Config, MinimalDocumentTakesDefaults) {
  const Config c = parse_config_string("version: 1\n");
  EXPECT_EQ(c.replicas, 10'000u);
  EXPECT_EQ(c.kernel.name, "product");
  EXPECT_EQ(c.distribution.kind, "rademacher");
  EXPECT_EQ(c.tolerance.degeneracy, 1e-9);
  EXPECT_EQ(c.tolerance.min_fit_points, 5u);
}

TEST(Config, VersionIsRequired) {
  EXPECT_THROW(parse_config_string("seed: 3\n"), ConfigError);
  EXPECT_THROW(parse_config_string("version: 2\n"), ConfigError);
}

TEST(Config, UnknownKeyNamesKeyAndLine) {
  try {
    parse_config_string("version: 1\nkernal:\n  name: gini\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "kernal");
    EXPECT_EQ(e.line(), 2);
  }
}

TEST(Config, NestedUnknownKey) {
  try {
    parse_config_string("version: 1\nkernel:\n  name: gini\n  arty: 2\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "kernel.arty");
    EXPECT_EQ(e.line(), 4);
  }
}

TEST(Config, BernoulliProbabilityOutOfRange) {
  try {
    parse_config_string("version: 1\ndesign:\n  kind: bernoulli\n  p: 1.5\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "design.p");
    EXPECT_EQ(e.line(), 4);
  }
}

TEST(Config, GridForms) {
  const Config c = parse_config_string(
      "version: 1\nx_grid: {from: 1, to: 100, count: 3, spacing: log}\n");
  const auto v = c.x_grid.values();
  ASSERT_EQ(v.size(), 3u);
  EXPECT_NEAR(v[1], 10.0, 1e-12);
  const Config d = parse_config_string("version: 1\nx_grid: [0.5, 1, 2]\n");
  EXPECT_EQ(d.x_grid.values(), (std::vector<double>{0.5, 1, 2}));
  EXPECT_THROW(parse_config_string("version: 1\nx_grid: [1, 0.5]\n"), ConfigError);
  EXPECT_THROW(parse_config_string("version: 1\nseed: -3\n"), ConfigError);
}

TEST(Config, ExperimentFieldsAreRequired) {
  Config c;
  c.experiment = "tailscan";
  EXPECT_THROW(require_experiment_fields(c), ConfigError);
  c.n = 10;
  c.x_grid.points = {1.0};
  EXPECT_NO_THROW(require_experiment_fields(c));
}

TEST(Config, RoundTripsThroughEmit) {
  Config c;
  c.experiment = "incomplete-compare";
  c.seed = 0xdeadbeefcafeULL;
  c.kernel.name = "gini";
  c.kernel.sup_bound = 0.1 + 0.2;
  c.kernel.degeneracy = 1;
  c.distribution.kind = "finite";
  c.distribution.atoms = {{-1.0}, {1.0 / 3.0}};
  c.distribution.probs = {0.25, 0.75};
  c.design = DesignConfig{"bernoulli", 0, 0.3};
  c.scaling = ScalingConfigFile{{20, 40}, {100, 1000}, "without-replacement", 0.9, false, 4.0};
  c.martingale = MartingaleConfig{};
  c.martingale->x = GridSpec{{}, 0.5, 8.0, 6, true};
  c.envelope = EnvelopeConfig{2.0, 0.5, 1.5, 3.0, 2.5};
  c.sample = {{1.0, 2.0}, {3.0, 4.0}};
  EXPECT_EQ(parse_config_string(emit_config(c)), c);
}

TEST(Config, RandomConfigsRoundTrip) {
  testing::for_cases(404, 40, [](testing::Gen& g, int c) {
    Config cfg;
    cfg.seed = g.rng().next_u64();
    cfg.replicas = static_cast<std::size_t>(g.int_in(100, 100000));
    cfg.threads = g.int_in(0, 16);
    cfg.n = static_cast<std::size_t>(g.int_in(0, 500));
    cfg.kernel.name = std::vector<std::string>{"gini", "product", "zero", "identity"}[g.int_in(0, 3)];
    if (g.int_in(0, 1)) cfg.kernel.sup_bound = g.real_in(0.01, 10.0);
    const int k = g.int_in(1, 6);
    for (int i = 0; i < k; ++i) cfg.x_grid.points.push_back(g.real_in(0, 1) + i);
    cfg.tolerance.window_lo = g.real_in(1e-6, 1e-2);
    if (g.int_in(0, 1)) cfg.design = DesignConfig{"with-replacement", static_cast<std::uint64_t>(g.int_in(1, 1000)), 1.0};
    if (g.int_in(0, 1)) cfg.envelope = EnvelopeConfig{g.real_in(0, 3), g.real_in(0, 3), 1.0, g.real_in(0.1, 3), std::nullopt};
    EXPECT_EQ(parse_config_string(emit_config(cfg)), cfg) << "case " << c;
  });
}

TEST(Config, DesignFlag) {
  EXPECT_EQ(parse_design_flag("with-replacement:100").draws, 100u);
  EXPECT_EQ(parse_design_flag("without-replacement:7").kind, "without-replacement");
  EXPECT_DOUBLE_EQ(parse_design_flag("bernoulli:0.25").p, 0.25);
  EXPECT_THROW(parse_design_flag("bernoulli"), ConfigError);
  EXPECT_THROW(parse_design_flag("poisson:3"), ConfigError);
}

TEST(Runner, EstimateProductSample) {
  const fs::path dir = scratch("estimate");
  RunOptions o;
  o.subcommand = "estimate";
  o.kernel = "product";
  o.sample = "1,-1,2";
  o.out = dir.string();
  std::ostringstream out, err;
  ASSERT_EQ(run(o, out, err), kExitOk) << err.str();
  EXPECT_NE(out.str().find("complete,2,3,3,1,-1"), std::string::npos) << out.str();
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest["results"]["value"][0].get<double>(), -1.0);
  EXPECT_EQ(manifest["config_sha256"], sha256_file((dir / "config.yaml").string()));
  for (const auto& f : manifest["files"])
    EXPECT_EQ(f["sha256"], sha256_file((dir / f["name"].get<std::string>()).string()));
}

TEST(Runner, WeightsFile) {
  const fs::path dir = scratch("weights");
  RunOptions o;
  o.subcommand = "estimate";
  o.kernel = "product";
  o.sample = "1,-1,2";
  o.out = dir.string();
  o.weights_file = write_file(dir / "w.csv", "# i,j,w\n1,3,0.5\n2,3,2\n");
  std::ostringstream out, err;
  ASSERT_EQ(run(o, out, err), kExitOk) << err.str();
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_DOUBLE_EQ(manifest["results"]["value"][0].get<double>(), 0.5 * 2 + 2 * -2);

  const WeightScheme w = parse_weights_file(o.weights_file->c_str(), 2);
  EXPECT_EQ(w.explicit_entries().size(), 2u);
  write_file(dir / "bad.csv", "2,1,1\n");
  EXPECT_THROW(parse_weights_file((dir / "bad.csv").string(), 2), ConfigError);
}

TEST(Runner, ArityFlagMustAgree) {
  RunOptions o;
  o.subcommand = "estimate";
  o.kernel = "gini";
  o.m = 3;
  o.sample = "1,2,3";
  std::ostringstream out, err;
  EXPECT_EQ(run(o, out, err), kExitUsage);
  EXPECT_NE(err.str().find("arity"), std::string::npos);
}

TEST(Runner, ExperimentMismatchIsUsageError) {
  const fs::path dir = scratch("mismatch");
  RunOptions o;
  o.subcommand = "decompose";
  o.config_path = write_file(dir / "c.yaml", "version: 1\nexperiment: tailscan\n");
  std::ostringstream out, err;
  EXPECT_EQ(run(o, out, err), kExitUsage);
}

TEST(Runner, DeclaredDegeneracyMismatchExitsTwo) {
  const fs::path dir = scratch("decompose");
  RunOptions o;
  o.subcommand = "decompose";
  o.out = dir.string();
  o.config_path = write_file(dir / "c.yaml", "version: 1\nkernel: {name: product, degeneracy: 1}\n");
  std::ostringstream out, err;
  EXPECT_EQ(run(o, out, err), kExitViolation) << err.str();
  o.config_path = write_file(dir / "c.yaml", "version: 1\nkernel: {name: product, degeneracy: 2}\nn: 8\n");
  EXPECT_EQ(run(o, out, err), kExitOk) << err.str();
}

TEST(Runner, MartingaleVerifyPasses) {
  const fs::path dir = scratch("martingale");
  RunOptions o;
  o.subcommand = "martingale-verify";
  o.out = dir.string();
  o.config_path = write_file(dir / "c.yaml",
                             "version: 1\nreplicas: 2000\nseed: 5\n"
                             "martingale:\n  n: 20\n  x: [2, 4, 8]\n  y: [1, 2, 4]\n");
  std::ostringstream out, err;
  EXPECT_EQ(run(o, out, err), kExitOk) << err.str() << out.str();
  for (const char* v : {"real", "A2", "A3", "conv"})
    EXPECT_TRUE(fs::exists(dir / (std::string("martingale-") + v + ".csv"))) << v;
}

TEST(Runner, GridFileOverridesGrids) {
  const fs::path dir = scratch("gridfile");
  RunOptions o;
  o.subcommand = "martingale-verify";
  o.out = dir.string();
  o.variant = "A2";
  o.grid_file = write_file(dir / "g.yaml", "x: [1, 3]\ny: [2]\n");
  o.config_path = write_file(dir / "c.yaml", "version: 1\nreplicas: 1000\nmartingale: {n: 10}\n");
  std::ostringstream out, err;
  ASSERT_EQ(run(o, out, err), kExitOk) << err.str();
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest["results"]["variants"]["A2"]["cells"], 2);
  EXPECT_FALSE(fs::exists(dir / "martingale-real.csv"));
}

TEST(Runner, RerunIsBitIdenticalAcrossThreads) {
  const std::string text =
      "version: 1\nreplicas: 400\nseed: 11\nn: 12\nx_grid: [0.1, 0.3, 1]\nkernel: {name: product}\n";
  std::vector<nlohmann::json> files;
  for (int threads : {1, 3, 1}) {
    const fs::path dir = scratch("rerun" + std::to_string(files.size()));
    RunOptions o;
    o.subcommand = "tailscan";
    o.out = dir.string();
    o.threads = threads;
    o.config_path = write_file(dir / "c.yaml", text);
    std::ostringstream out, err;
    ASSERT_EQ(run(o, out, err), kExitOk) << err.str();
    auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
    files.push_back(m["files"]);
    for (const auto& f : m["files"])
      if (f["name"] == "config.yaml") EXPECT_EQ(f["sha256"], m["config_sha256"]);
  }
  // config.yaml records the thread count and output dir, so compare the data artifacts.
  auto data = [](const nlohmann::json& fs) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& f : fs)
      if (f["name"] != "config.yaml") out.push_back(f);
    return out;
  };
  EXPECT_EQ(data(files[0]), data(files[1]));
  EXPECT_EQ(data(files[0]), data(files[2]));
}

TEST(Util, Sha256KnownAnswers) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Util, AtomicWriteLeavesNoTemp) {
  const fs::path dir = scratch("atomic");
  const std::string p = (dir / "a.txt").string();
  write_atomic(p, "one");
  write_atomic(p, "two");
  EXPECT_EQ(slurp(p), "two");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  EXPECT_EQ(entries, 1u);
}

TEST(Util, FormatDoubleRoundTrips) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}

}  // namespace
}  // namespace ustat::cli
