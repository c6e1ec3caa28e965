#pragma once

#include <cstddef>
#include <vector>

#include "adaptd/approximator.hpp"
#include "adaptd/mdp.hpp"

namespace adaptd {

struct TargetEntry {
  State state;
  double value = 0.0;
  std::size_t trajectory = 0;
  std::size_t step = 0;
  /// The source trajectory was cut by the step cap.
  bool truncated = false;
};

using TargetSet = std::vector<TargetEntry>;

/// Monte Carlo return for every visited state occurrence, in dataset order.
/// On a truncated trajectory the tail is bootstrapped with `tail_value` at the
/// cut state when one is given, and taken as 0 otherwise; either way the
/// entries are flagged. Throws std::invalid_argument on an empty dataset or
/// gamma outside (0, 1].
TargetSet mc_targets(const Dataset& data, double gamma, const ValueApproximator* tail_value = nullptr);

/// Monte Carlo returns of one trajectory, index-aligned with its transitions.
std::vector<double> mc_returns(const Trajectory& trajectory, double gamma, double tail = 0.0);

/// r + gamma * V(s'), with V(s') taken as 0 on a terminal transition.
double td0_target(const Transition& transition, const ValueApproximator& value, double gamma);

/// Forward-view lambda-return at every step of the trajectory, bootstrapping
/// n-step returns with `value`. lambda = 0 gives TD(0) targets and lambda = 1
/// the Monte Carlo returns. A truncated trajectory bootstraps its tail at the
/// cut state. Throws std::invalid_argument for lambda outside [0, 1].
std::vector<double> lambda_targets(const Trajectory& trajectory, const ValueApproximator& value, double gamma,
                                   double lambda);

/// Candidate lambda grid for the TD(lambda) baselines.
inline constexpr double kLambdaGrid[] = {0.25, 0.5, 0.75, 0.9};

}  // namespace adaptd
