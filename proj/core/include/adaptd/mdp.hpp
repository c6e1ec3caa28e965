#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "adaptd/rng.hpp"

namespace adaptd {

/// A state is either a discrete id (tabular environments) or a point in the
/// plane (Labyrinth-2D, Mountain Car).
class State {
 public:
  using Coords = std::array<double, 2>;

  State() = default;
  static State discrete(std::int64_t id) { return State(id); }
  static State point(double x, double y) { return State(Coords{x, y}); }

  bool is_discrete() const noexcept { return std::holds_alternative<std::int64_t>(value_); }
  std::int64_t id() const;
  const Coords& coords() const;
  double x() const { return coords()[0]; }
  double y() const { return coords()[1]; }

  friend bool operator==(const State&, const State&) = default;

 private:
  explicit State(std::int64_t id) : value_(id) {}
  explicit State(Coords c) : value_(c) {}

  std::variant<std::int64_t, Coords> value_{std::int64_t{0}};
};

std::string to_string(const State& s);

struct Transition {
  State state;
  int action = 0;
  double reward = 0.0;
  State next_state;
  bool terminal = false;
};

struct Trajectory {
  std::vector<Transition> transitions;

  std::size_t size() const noexcept { return transitions.size(); }
  bool empty() const noexcept { return transitions.empty(); }
  /// Cut by the step cap rather than ended by the environment.
  bool truncated() const noexcept { return !transitions.empty() && !transitions.back().terminal; }
};

/// Throws std::invalid_argument if the trajectory breaks chaining, carries a
/// non-final terminal flag, or has a non-finite reward.
void validate(const Trajectory& trajectory);

struct Dataset {
  std::vector<Trajectory> trajectories;
  std::string env_id;
  std::string policy_id;
  std::uint64_t seed = 0;

  std::size_t transition_count() const noexcept;
};

/// Axis-aligned box, inclusive bounds.
struct Box {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  double width() const noexcept { return x_max - x_min; }
  double height() const noexcept { return y_max - y_min; }
  bool contains(double x, double y) const noexcept {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }
  friend bool operator==(const Box&, const Box&) = default;
};

/// Either `discrete_count` ids, or continuous states inside `box`.
struct StateSpace {
  std::size_t discrete_count = 0;
  Box box{};

  bool discrete() const noexcept { return discrete_count > 0; }
};

struct StepResult {
  State next;
  double reward = 0.0;
  bool terminal = false;
};

/// Immutable episodic MDP. All randomness comes from the caller's engine, so
/// one instance can serve any number of concurrent rollouts.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string id() const = 0;
  virtual double discount() const = 0;
  virtual int action_count() const = 0;
  virtual StateSpace state_space() const = 0;
  virtual State initial_state(Rng& rng) const = 0;
  virtual StepResult step(const State& s, int action, Rng& rng) const = 0;

  /// Whether `s` is a legal, non-terminal state (used to build evaluation
  /// lattices; wall interiors are not free).
  virtual bool is_free(const State& s) const;
  /// Closed-form value of the environment's reference policy, if known.
  virtual std::optional<double> true_value(const State& s) const;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string id() const = 0;
  virtual int action(const State& s, Rng& rng) const = 0;
};

/// An environment paired with the policy being evaluated.
struct Scenario {
  std::shared_ptr<const Environment> env;
  std::shared_ptr<const Policy> policy;
};

inline constexpr std::size_t kDefaultMaxSteps = 50000;

/// Runs one episode from `start`, stopping at a terminal transition or after
/// `max_steps` transitions.
Trajectory rollout(const Environment& env, const Policy& policy, const State& start,
                   std::size_t max_steps, Rng& rng);

/// Trajectory i is driven by its own engine seeded with derive_seed(seed, i),
/// so the result does not depend on `threads`.
Dataset collect_trajectories(const Environment& env, const Policy& policy, std::size_t n,
                             std::size_t max_steps, std::uint64_t seed, std::size_t threads = 1);

/// sum_k gamma^k r_{from+k} over the rest of the trajectory.
double discounted_return(const Trajectory& trajectory, double gamma, std::size_t from);

}  // namespace adaptd
