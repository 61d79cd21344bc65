#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mhb/io.hpp"

namespace mhb::harness {

using io::Json;

enum class ExperimentKind { Analyze, BoundSweep, TailVerify, BanditME, BanditUCB };
enum class OutputFormat { Csv, Json };
enum class TailMode { Auto, Exact, Empirical };

const char* to_string(ExperimentKind kind);

struct BetaPolicy {
  /// floor for median elimination, 1.01 floor for UCB.
  bool automatic = true;
  double value = 0.0;
  /// Run even when `value` violates the algorithm's hypothesis.
  bool force = false;
};

/// Declarative description of one experiment. The JSON config mirrors the
/// fields one-to-one (see README).
struct ExperimentConfig {
  std::string id = "experiment";
  ExperimentKind kind = ExperimentKind::Analyze;

  std::filesystem::path chain;
  /// State reward for the base chain, or a pair reward when `pair` is set.
  std::filesystem::path rewards;
  std::filesystem::path instance;
  bool pair = false;

  std::vector<std::uint64_t> n_grid;
  /// Sum deviations t, or mean deviations eps when `mean_form` is set.
  std::vector<double> t_grid;
  bool mean_form = false;
  TailMode mode = TailMode::Auto;
  /// Start distribution of X_1; defaults to the stationary distribution.
  std::optional<std::vector<double>> start;
  std::uint64_t trials = 1;

  std::uint64_t runs = 1;
  std::uint64_t horizon = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  BetaPolicy beta;

  std::uint64_t seed = 0;
  unsigned parallelism = 1;
  std::filesystem::path output;
  OutputFormat format = OutputFormat::Csv;
};

/// Relative paths in `j` resolve against `base_dir`. Throws ConfigParse
/// on unknown kinds, missing seed, empty or non-increasing grids, or
/// trials < 1.
ExperimentConfig parse_config(const Json& j,
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Validates the invariants parse_config enforces, for configs built in
/// code.
void validate_config(const ExperimentConfig& config);

/// config.parallelism unless the MHB_THREADS environment variable is set.
unsigned effective_parallelism(const ExperimentConfig& config);

/// One row of per-trial output; `seed` is derived_seed(master, trial).
struct TrialRecord {
  std::string experiment_id;
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> metrics;

  double metric(const std::string& name) const;
};

/// Rows of output with a fixed column order, rendered as CSV or a JSON
/// array of objects.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;

  std::string to_csv() const;
  Json to_json() const;
};

struct ExperimentOutput {
  Json summary;
  Table table;
  /// Bandit runs; empty for other kinds.
  std::vector<TrialRecord> trials;

  /// The table rendered in the configured format.
  std::string render(OutputFormat format) const;
};

/// Runs the experiment without touching the filesystem beyond reading
/// inputs.
ExperimentOutput execute(const ExperimentConfig& config);

/// execute() plus writing config.output (when set) and its sidecar
/// "<output>.meta.json" that holds the only wall-clock field. Returns the
/// summary.
Json run_config(const ExperimentConfig& config);

/// Checkpoints for UCB output: powers of two up to T, then T.
std::vector<std::uint64_t> ucb_checkpoints(std::uint64_t horizon);

}  // namespace mhb::harness
