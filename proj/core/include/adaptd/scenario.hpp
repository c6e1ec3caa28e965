#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "adaptd/approximator.hpp"
#include "adaptd/envs.hpp"
#include "adaptd/eval.hpp"
#include "adaptd/mdp.hpp"

namespace adaptd {

enum class EnvKind { chain, labyrinth, mountain_car };

std::string to_string(EnvKind kind);
EnvKind parse_env_kind(std::string_view text);

/// Declarative description of one experimental setting: environment, its
/// reference policy and the approximator family used on it.
struct EnvSpec {
  EnvKind kind = EnvKind::chain;
  /// Row label in result tables; derived from the other fields when empty.
  std::string name;

  ChainConfig chain;
  int map_id = 0;
  std::string map_file;  // overrides map_id when set
  double step_size = kDefaultStepSize;
  double eps = 0.2;

  /// Defaults: tabular on the chain, grid on Labyrinth-2D, MLP on Mountain Car.
  std::optional<ApproximatorKind> approximator;
  /// Forced value offset at both chain bottlenecks for biased_tabular.
  double clamp_beta = 1.0;
  double cell_size = kDefaultGridCell;
  /// Output scale of the MLP; 0 picks a per-environment default.
  double output_scale = 0.0;

  LatticeSpec lattice;
};

struct BuiltScenario {
  std::string name;
  Scenario scenario;
  ApproximatorSpec approximator;
  /// s_1..s_k on the chain, the free lattice otherwise.
  EvalStates eval;
};

/// Throws std::invalid_argument on an invalid combination (e.g. an MLP on
/// discrete states or a biased approximator off the chain).
BuiltScenario build_scenario(const EnvSpec& spec);

/// Parses one environment object; unknown keys are rejected.
EnvSpec parse_env_spec(std::string_view json_text);
std::string env_spec_to_json(const EnvSpec& spec);

}  // namespace adaptd
