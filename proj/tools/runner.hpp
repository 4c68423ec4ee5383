#pragma once

// Subcommand orchestration: merges flags into the config, runs one
// experiment, writes CSV + plot data + manifest.json into the output dir.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"
#include "json.hpp"

namespace ustat::cli {

enum ExitStatus : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitViolation = 2,
};

struct RunOptions {
  std::string subcommand;
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;

  // estimate
  std::optional<std::string> kernel;
  std::optional<int> m;
  std::optional<std::size_t> n;
  std::optional<std::string> design;
  std::optional<std::string> weights_file;
  /// Comma-separated scalars, or ';'-separated points of comma-separated coords.
  std::optional<std::string> sample;

  // martingale-verify
  std::optional<std::string> variant;
  std::optional<std::string> grid_file;
};

/// Config after applying flags and the subcommand. Throws ConfigError.
Config effective_config(const RunOptions& opts);

struct RunOutcome {
  int status = kExitOk;
  /// Paths written, manifest last.
  std::vector<std::string> files;
  nlohmann::json manifest;
};

/// Runs cfg.experiment. Library and config errors propagate.
RunOutcome run_experiment(const Config& cfg, std::ostream& log);

/// Full front door: effective config, run, error reporting on `err`.
/// Returns the exit status.
int run(const RunOptions& opts, std::ostream& out, std::ostream& err);

/// Lowercase hex SHA-256.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

/// %.17g.
std::string format_double(double v);

/// Write-temp-then-rename.
void write_atomic(const std::string& path, const std::string& content);

/// Weights file: lines "i_1,...,i_m,weight" with 1-based increasing indices;
/// '#' starts a comment. Unlisted tuples get weight 0.
WeightScheme parse_weights_file(const std::string& path, int m);

}  // namespace ustat::cli
