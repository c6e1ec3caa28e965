#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adaptd/adaptive.hpp"
#include "adaptd/eval.hpp"
#include "adaptd/scenario.hpp"

namespace adaptd {

/// An algorithm column of the sweep. "td_lambda:0.5" selects TD(lambda) with
/// lambda = 0.5; plain "td_lambda" uses the evaluator's lambda.
struct AlgorithmSpec {
  std::string label;
  Algorithm algorithm = Algorithm::mc;
  std::optional<double> lambda;
};

AlgorithmSpec parse_algorithm_spec(std::string_view text);

struct SweepEnv {
  EnvSpec spec;
  /// Evaluator settings for this environment; algorithm, lambda and the
  /// approximator are filled in per cell.
  EvaluatorConfig evaluator;
  /// Precomputed ground truth to load instead of estimating one.
  std::string ground_truth_file;
};

struct SweepConfig {
  std::vector<SweepEnv> envs;
  std::vector<AlgorithmSpec> algorithms;
  std::vector<std::size_t> n_rollouts;
  std::vector<std::uint64_t> seeds;
  std::size_t max_steps = kDefaultMaxSteps;
  GroundTruthOptions ground_truth;
  std::uint64_t ground_truth_seed = 20240101;
  /// Worker threads over cells; 0 means hardware concurrency.
  std::size_t threads = 0;
  /// Off by default so that result files are byte-reproducible; the
  /// wall_time_ms column is then 0.
  bool record_wall_time = false;
  bool export_violation_maps = false;

  void validate() const;
};

/// Parses a sweep document. Top-level evaluator keys (alpha, members,
/// bootstrap, fallback, lambda, epochs, tolerance, budget, refresh) set the
/// defaults, and an environment's "evaluator" object overrides them.
SweepConfig parse_sweep_config(std::string_view json_text);
SweepConfig load_sweep_config(const std::filesystem::path& path);
/// Canonical JSON with every default spelled out.
std::string sweep_config_to_json(const SweepConfig& cfg);

struct ResultRow {
  std::string env_id;
  std::string algorithm;
  std::size_t n_rollouts = 0;
  std::uint64_t seed = 0;
  double msve = 0.0;
  double gate_rate = 0.0;
  double wall_time_ms = 0.0;

  std::string key() const;
};

inline constexpr std::string_view kResultsHeader = "env_id,algorithm,n_rollouts,seed,msve,gate_rate,wall_time_ms";

/// One CSV line (no newline). Doubles use the shortest round-trip form.
std::string format_result_row(const ResultRow& row);
void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
/// Throws std::runtime_error on a malformed file.
std::vector<ResultRow> read_results_csv(std::istream& in);
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);

struct CellFailure {
  std::string key;
  std::string error;
};

struct SweepOutcome {
  /// Canonical order: environment, n, seed, algorithm as listed in the config.
  std::vector<ResultRow> rows;
  std::vector<CellFailure> failures;
  std::size_t reused = 0;
};

/// Ground truth for one environment of the sweep (loaded, analytic or
/// estimated).
GroundTruth sweep_ground_truth(const SweepConfig& cfg, std::size_t env_index, const BuiltScenario& built);

/// Dataset seed of a cell; shared by all algorithms of the cell.
std::uint64_t dataset_seed(std::uint64_t seed, const std::string& env_name, std::size_t n);

/// Runs one (env, algorithm, n, seed) cell.
ResultRow run_cell(const SweepConfig& cfg, std::size_t env_index, const AlgorithmSpec& algorithm, std::size_t n,
                   std::uint64_t seed, const BuiltScenario& built, const GroundTruth& gt);

/// Runs every cell. With a non-empty `output_dir` rows are appended to
/// results.csv as they finish, cells already present there are reused, and
/// the final file plus the report tables are rewritten in canonical order.
/// A failing cell is recorded and the sweep continues.
SweepOutcome run_sweep(const SweepConfig& cfg, const std::filesystem::path& output_dir = {});

/// summary.csv (mean +- 1.96 stderr over seeds), normalized_max.csv,
/// normalized_minmax.csv and normalized_minmax_average.csv.
void write_reports(const std::filesystem::path& dir, const std::vector<ResultRow>& rows);

}  // namespace adaptd
