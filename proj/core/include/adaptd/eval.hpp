#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adaptd/approximator.hpp"
#include "adaptd/confidence.hpp"
#include "adaptd/mdp.hpp"

namespace adaptd {

/// Evaluation lattice: cell centres of an nx x ny grid laid over the state
/// box, wall interiors and terminal states dropped.
struct LatticeSpec {
  std::size_t nx = 40;
  std::size_t ny = 30;
};

/// A set of evaluation states, each tagged with its lattice coordinates
/// (for discrete states: (id, 0)).
struct EvalStates {
  std::vector<State> states;
  std::vector<std::array<int, 2>> cells;

  std::size_t size() const noexcept { return states.size(); }
};

EvalStates lattice_states(const Environment& env, const LatticeSpec& spec);

struct GroundTruth {
  std::string env_id;
  EvalStates eval;
  std::vector<double> values;
  std::vector<std::size_t> samples;
  std::vector<double> std_errors;
  /// Values come from the environment's closed form rather than rollouts.
  bool analytic = false;

  std::size_t size() const noexcept { return values.size(); }
};

struct GroundTruthOptions {
  std::size_t episodes = 300;
  std::size_t max_steps = kDefaultMaxSteps;
  std::size_t threads = 0;
};

/// Mean discounted return of `options.episodes` fresh episodes started at
/// every state. Episode e from state i uses derive_seed(seed, i, e).
/// Throws std::invalid_argument when episodes is 0 or there are no states.
GroundTruth estimate_ground_truth(const Environment& env, const Policy& policy, const EvalStates& states,
                                  const GroundTruthOptions& options, std::uint64_t seed);

/// Ground truth from Environment::true_value. Throws std::invalid_argument if
/// any state lacks a closed form.
GroundTruth analytic_ground_truth(const Environment& env, const EvalStates& states);

void save_ground_truth(const std::filesystem::path& path, const GroundTruth& gt);
GroundTruth load_ground_truth(const std::filesystem::path& path);

/// Weighted mean of squared errors over the ground-truth states; uniform
/// weights when `weights` is empty. Throws std::invalid_argument on an empty
/// ground truth or weights that are negative, mismatched or sum to zero.
double msve(const ValueApproximator& v, const GroundTruth& gt, std::span<const double> weights = {});

/// Squared errors split by whether the state's cell received any training
/// data. Only meaningful for cell approximators; for others every state
/// counts as visited.
struct VisitSplit {
  double visited_msve = 0.0;
  double unvisited_msve = 0.0;
  std::size_t visited = 0;
  std::size_t unvisited = 0;
};
VisitSplit msve_by_visits(const ValueApproximator& v, const GroundTruth& gt);

using Scores = std::map<std::string, double>;

/// MSVE(A) / max_A' MSVE(A'). Throws std::invalid_argument if empty or the
/// maximum is not positive.
Scores normalize_by_max(const Scores& msve);

struct MinMaxScores {
  Scores values;
  /// All inputs were equal; every value is 0 by convention.
  bool tied = false;
};

/// (MSVE(A) - min) / (max - min). Throws std::invalid_argument if empty.
MinMaxScores normalize_minmax(const Scores& msve);

/// Equal-weight average across scenarios. Every scenario must score the same
/// algorithms.
Scores average_scores(std::span<const Scores> per_scenario);

enum class Violation { inside, over, under };
std::string to_string(Violation v);

struct ViolationCell {
  std::array<int, 2> cell{};
  double reference = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  Violation label = Violation::inside;
};

/// Labels each state: over when reference > U, under when reference < L,
/// inside otherwise (closed interval).
std::vector<ViolationCell> violation_map(const ConfidenceFunction& cf, const EvalStates& states,
                                         std::span<const double> reference);

/// CSV with columns cell_x, cell_y, label after a comment line recording the
/// sign convention.
void write_violation_map(std::ostream& out, std::span<const ViolationCell> cells);

}  // namespace adaptd
