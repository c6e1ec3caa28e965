#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adaptd/approximator.hpp"
#include "adaptd/confidence.hpp"
#include "adaptd/mdp.hpp"

namespace adaptd {

enum class Algorithm { mc, td0, td_lambda, mc_ensemble, adaptive_td };
enum class Fallback { midpoint, clip };
/// When TD targets are rebuilt from the current estimate during minibatch
/// training. Exact (cell) approximators always refresh once per sweep.
enum class TargetRefresh { per_minibatch, per_epoch };

std::string to_string(Algorithm a);
std::string to_string(Fallback f);
std::string to_string(TargetRefresh r);
Algorithm parse_algorithm(std::string_view text);
Fallback parse_fallback(std::string_view text);
TargetRefresh parse_refresh(std::string_view text);

struct EvaluatorConfig {
  Algorithm algorithm = Algorithm::adaptive_td;
  double lambda = 0.75;
  double alpha = 0.95;
  /// Overrides alpha with an explicit interval multiplier: +inf never gates,
  /// 0 collapses every interval onto the ensemble mean.
  std::optional<double> quantile;
  std::size_t members = 3;
  bool bootstrap = true;
  Fallback fallback = Fallback::midpoint;
  /// Sweep cap for exact approximators, which stop earlier once no cell
  /// value moves by more than `tolerance`.
  std::size_t epochs = 200000;
  double tolerance = 1e-7;
  /// Minibatches for incremental approximators, per network.
  std::size_t budget = 50000;
  TargetRefresh refresh = TargetRefresh::per_minibatch;
  ApproximatorSpec approximator;
  std::size_t threads = 1;
  /// Grouped sweep for cell approximators. Off runs the plain
  /// predict-and-fit loop (same fixed point, slower).
  bool compile_cells = true;

  /// Throws std::invalid_argument if a field is out of range for `algorithm`.
  void validate() const;
};

/// Gate: `td` itself when L < td < U, otherwise the interval
/// midpoint or the nearer endpoint. A point interval (L == U) accepts only
/// td == L. Throws std::invalid_argument if L > U.
double select_target(double td, double lower, double upper, Fallback fallback);

struct EpochLog {
  /// Mean squared error between the targets of the epoch and the estimate.
  double loss = 0.0;
  /// Fraction of transitions whose TD target fell outside the open interval.
  double gate_rate = 0.0;
};

struct EvaluationResult {
  std::unique_ptr<ValueApproximator> value;
  /// Set for adaptive_td and mc_ensemble.
  std::shared_ptr<const Ensemble> ensemble;
  std::vector<EpochLog> epochs;
  /// Gate rate of the last epoch (0 for algorithms without a gate).
  double gate_rate = 0.0;
  bool converged = false;
  double wall_time_ms = 0.0;
};

/// Seed streams: V-hat and its minibatch sampler use derive_seed(seed,
/// stable_hash("value")) and the ensemble uses derive_seed(seed,
/// stable_hash("ensemble")), whatever the algorithm.
std::uint64_t value_seed(std::uint64_t seed);
std::uint64_t ensemble_seed(std::uint64_t seed);

/// Adaptive TD: trains the MC ensemble, freezes its intervals and runs gated
/// TD(0) from V-hat = 0.
EvaluationResult run_adaptive_td(const Dataset& data, double gamma, const EvaluatorConfig& cfg, std::uint64_t seed);

/// The gated TD loop against a given confidence function.
EvaluationResult run_gated_td(const Dataset& data, double gamma, const ConfidenceFunction& cf,
                              const EvaluatorConfig& cfg, std::uint64_t seed);

/// MC, TD(0), TD(lambda) or the MC ensemble mean.
EvaluationResult run_baseline(const Dataset& data, double gamma, const EvaluatorConfig& cfg, std::uint64_t seed);

/// Dispatches on cfg.algorithm.
EvaluationResult evaluate(const Dataset& data, double gamma, const EvaluatorConfig& cfg, std::uint64_t seed);

/// Fits V-hat to one fixed target per transition (dataset order) with the
/// same schedule and sampler as the TD loops.
EvaluationResult fit_fixed_targets(const Dataset& data, std::span<const double> targets, const EvaluatorConfig& cfg,
                                   std::uint64_t seed);

/// JSON record of a run: config, per-epoch log, gate rate and wall time.
std::string run_record_json(const EvaluatorConfig& cfg, const EvaluationResult& result, std::uint64_t seed,
                            const std::string& env_id, std::size_t n_rollouts);

/// Writes `run.json`, `value.json` and, when present, `ensemble_<i>.json`
/// into `dir`.
void write_run_artifacts(const std::filesystem::path& dir, const EvaluatorConfig& cfg, const EvaluationResult& result,
                         std::uint64_t seed, const std::string& env_id, std::size_t n_rollouts);

}  // namespace adaptd
