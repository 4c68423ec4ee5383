#pragma once

// Experiment configuration: a versioned YAML document. Parsing rejects
// unknown keys and reports the offending key with its line.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ustatlab/distributions.hpp"
#include "ustatlab/kernels.hpp"
#include "ustatlab/martingale.hpp"
#include "ustatlab/montecarlo.hpp"
#include "ustatlab/ustats.hpp"

namespace ustat::cli {

/// Either explicit points or an evenly spaced range.
struct GridSpec {
  std::vector<double> points;
  double from = 0.0;
  double to = 0.0;
  std::size_t count = 0;
  bool log_spacing = false;

  bool is_range() const { return points.empty() && count > 0; }
  std::vector<double> values() const;
  bool operator==(const GridSpec&) const = default;
};

struct KernelConfig {
  std::string name = "product";
  std::size_t grid = 16;  // empirical-indicator only
  int arity = 0;          // zero kernel only; 0 = default
  std::optional<double> sup_bound;
  std::optional<int> degeneracy;
  bool operator==(const KernelConfig&) const = default;
};

struct DistributionConfig {
  std::string kind = "rademacher";  // rademacher | uniform-grid | finite | discretized-gaussian
  int k = 3;
  std::size_t dim = 1;
  std::vector<std::vector<double>> atoms;
  std::vector<double> probs;
  bool operator==(const DistributionConfig&) const = default;
};

struct DesignConfig {
  std::string kind = "with-replacement";  // with-replacement | without-replacement | bernoulli
  std::uint64_t draws = 0;
  double p = 1.0;
  bool operator==(const DesignConfig&) const = default;
};

struct ScalingConfigFile {
  std::vector<std::size_t> n;
  std::vector<std::uint64_t> draws;
  std::string design = "with-replacement";
  double quantile = 0.9;
  /// Add Bernoulli cells at p = N / n^m wherever p <= 1.
  bool bernoulli_match = true;
  double max_ratio = 5.0;
  bool operator==(const ScalingConfigFile&) const = default;
};

struct MartingaleConfig {
  std::string generator = "bounded-signs";
  std::size_t n = 100;
  std::size_t dim = 1;
  std::vector<std::string> variants{"real", "A2", "A3", "conv"};
  GridSpec x;
  GridSpec y;
  GridSpec t;
  bool operator==(const MartingaleConfig&) const = default;
};

struct EnvelopeConfig {
  double a = 1.0;
  double b = 1.0;
  double c = 1.0;
  double y = 1.0;
  std::optional<double> log_power;
  bool operator==(const EnvelopeConfig&) const = default;
};

struct ToleranceConfig {
  double degeneracy = 1e-9;
  double window_lo = 1e-3;
  double window_hi = 0.5;
  std::size_t min_fit_points = 5;
  bool operator==(const ToleranceConfig&) const = default;
};

struct Config {
  int version = 1;
  std::string experiment = "estimate";
  std::uint64_t seed = 0;
  std::size_t replicas = 10'000;
  int threads = 0;
  std::string output = "out";
  KernelConfig kernel;
  DistributionConfig distribution;
  std::size_t n = 0;
  GridSpec x_grid;
  std::string statistic = "running-max";  // tailscan: running-max | final
  std::optional<DesignConfig> design;
  std::optional<ScalingConfigFile> scaling;
  std::optional<MartingaleConfig> martingale;
  std::optional<EnvelopeConfig> envelope;
  ToleranceConfig tolerance;
  std::vector<std::vector<double>> sample;
  std::string weights_file;

  bool operator==(const Config&) const = default;
};

inline constexpr std::size_t kMinReplicas = 100;

std::string emit_config(const Config& cfg);

/// x/y/t grids from a YAML file with optional keys x, y, t.
struct GridFile {
  GridSpec x;
  GridSpec y;
  GridSpec t;
};
GridFile parse_grid_file(const std::string& path);

/// Source line of each parsed key path ("design.p" -> 7).
using LineMap = std::map<std::string, int>;

/// Semantic checks (ranges, names, grids). Throws ConfigError, with the
/// line when `lines` knows the key.
void validate(const Config& cfg, const LineMap* lines = nullptr);

/// Throws ConfigError naming the key and line. `lines`, when given,
/// receives the source line of every key present.
Config parse_config_string(const std::string& text, LineMap* lines = nullptr);
Config parse_config_file(const std::string& path, LineMap* lines = nullptr);

/// Fields each experiment cannot run without (checked at run time so a
/// file can omit `experiment` and take it from the subcommand).
void require_experiment_fields(const Config& cfg, const LineMap* lines = nullptr);

// Builders from config values to library objects; throw ConfigError.
KernelSpec build_kernel(const Config& cfg);
SamplerSpec build_sampler(const DistributionConfig& d);
SamplingDesign build_design(const DesignConfig& d);
/// Parses "with-replacement:100", "without-replacement:10", "bernoulli:0.5".
DesignConfig parse_design_flag(const std::string& text);

}  // namespace ustat::cli
