#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "adaptd/mdp.hpp"

namespace adaptd {

// ---------------------------------------------------------------------------
// Chain MDP
//
//   s0 --a_i--> s_i --> b1 (i <= p) or b2 (i > p) --> q --R~N(mu, sigma^2)--> end
//
// Ids: s0 = 0, s_i = i (1..k), b1 = k+1, b2 = k+2, q = k+3, end = k+4.
// Every transition pays 0 except q -> end. gamma = 1, so v(s) = mu everywhere.
// ---------------------------------------------------------------------------

struct ChainConfig {
  int k = 10;
  int p = 5;
  double mu = 0.0;
  double sigma = 1.0;
};

class ChainEnv final : public Environment {
 public:
  explicit ChainEnv(ChainConfig cfg);

  const ChainConfig& config() const noexcept { return cfg_; }

  State start() const { return State::discrete(0); }
  State branch(int i) const;       // s_i, 1 <= i <= k
  State bottleneck(int j) const;   // b_j, j in {1, 2}
  State merge() const { return State::discrete(cfg_.k + 3); }
  State end() const { return State::discrete(cfg_.k + 4); }
  std::size_t state_count() const noexcept { return static_cast<std::size_t>(cfg_.k) + 5; }

  std::string id() const override;
  double discount() const override { return 1.0; }
  int action_count() const override { return cfg_.k; }
  StateSpace state_space() const override;
  State initial_state(Rng& rng) const override;
  StepResult step(const State& s, int action, Rng& rng) const override;
  bool is_free(const State& s) const override;
  std::optional<double> true_value(const State& s) const override;

 private:
  ChainConfig cfg_;
};

/// Uniform over the k actions at s0; the single action 0 elsewhere.
class ChainUniformPolicy final : public Policy {
 public:
  explicit ChainUniformPolicy(int k);
  std::string id() const override { return "uniform"; }
  int action(const State& s, Rng& rng) const override;

 private:
  int k_;
};

Scenario make_chain_scenario(const ChainConfig& cfg);

// ---------------------------------------------------------------------------
// Labyrinth-2D
// ---------------------------------------------------------------------------

struct Rect {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  bool contains(double px, double py) const noexcept {
    return px >= x && px <= x + w && py >= y && py <= y + h;
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

struct Disk {
  double cx = 0.0;
  double cy = 0.0;
  double r = 0.0;

  bool contains(double px, double py) const noexcept {
    const double dx = px - cx;
    const double dy = py - cy;
    return dx * dx + dy * dy <= r * r;
  }
  friend bool operator==(const Disk&, const Disk&) = default;
};

struct LabMap {
  std::string name;
  double width = 400.0;
  double height = 300.0;
  std::vector<Rect> walls;
  std::vector<Disk> goals;
  double reward = 30.0;
  double p_end = 0.0005;

  bool in_wall(double x, double y) const noexcept;
  bool in_goal(double x, double y) const noexcept;
  /// True if the closed segment (x0,y0)-(x1,y1) touches any wall.
  bool segment_hits_wall(double x0, double y0, double x1, double y1) const noexcept;

  friend bool operator==(const LabMap&, const LabMap&) = default;
};

/// Throws std::invalid_argument on geometry that violates the map contract:
/// non-positive extent, walls or goals outside bounds, or a goal entirely
/// covered by walls.
void validate(const LabMap& map);

/// Map file schema: {width, height, walls:[{x,y,w,h}], goals:[{cx,cy,r}], reward, p_end}.
LabMap parse_lab_map(std::string_view json_text);
LabMap load_lab_map(const std::filesystem::path& path);
std::string lab_map_to_json(const LabMap& map);

/// The six shipped layouts, ids 0..5.
LabMap builtin_lab_map(int id);

inline constexpr double kDefaultStepSize = 5.0;
inline constexpr int kAngleBins = 360;

/// Random-heading walker. Action a in [0, 360) selects a one-degree bin and
/// the heading is drawn uniformly inside it, so a uniform policy over actions
/// yields a heading uniform on [0, 2*pi). Moves that leave the map or touch a
/// wall are rejected (the agent stays put). Reward is paid whenever the
/// resulting position lies in a goal disk; after every step the episode ends
/// with probability p_end.
class LabyrinthEnv final : public Environment {
 public:
  LabyrinthEnv(LabMap map, double step_size = kDefaultStepSize, std::string id = "labyrinth");
  LabyrinthEnv(LabMap map, double step_size, double p_end, std::string id);

  const LabMap& map() const noexcept { return map_; }
  double step_size() const noexcept { return step_size_; }
  double p_end() const noexcept { return p_end_; }

  std::string id() const override { return id_; }
  double discount() const override { return 1.0; }
  int action_count() const override { return kAngleBins; }
  StateSpace state_space() const override;
  State initial_state(Rng& rng) const override;
  StepResult step(const State& s, int action, Rng& rng) const override;
  bool is_free(const State& s) const override;

  /// Deterministic part of a step: position after moving along `angle`.
  State move(const State& s, double angle) const;

 private:
  LabMap map_;
  double step_size_;
  double p_end_;
  std::string id_;
};

class UniformAnglePolicy final : public Policy {
 public:
  std::string id() const override { return "uniform-angle"; }
  int action(const State& s, Rng& rng) const override;
};

Scenario make_labyrinth_scenario(LabMap map, double step_size = kDefaultStepSize,
                                 std::string id = "labyrinth");

// ---------------------------------------------------------------------------
// Mountain Car (position, velocity) with reward -1 per step until position
// reaches 0.5. State coords are (position, velocity).
// ---------------------------------------------------------------------------

struct MountainCarConfig {
  double gamma = 0.99;
  double goal_position = 0.5;
};

class MountainCarEnv final : public Environment {
 public:
  static constexpr double kMinPosition = -1.2;
  static constexpr double kMaxPosition = 0.6;
  static constexpr double kMaxSpeed = 0.07;
  static constexpr double kForce = 0.001;
  static constexpr double kGravity = 0.0025;

  explicit MountainCarEnv(MountainCarConfig cfg = {});

  std::string id() const override { return "mountain-car"; }
  double discount() const override { return cfg_.gamma; }
  int action_count() const override { return 3; }
  StateSpace state_space() const override;
  /// Uniform over positions below the goal and all velocities.
  State initial_state(Rng& rng) const override;
  /// Action ids 0, 1, 2 push with -1, 0, +1.
  StepResult step(const State& s, int action, Rng& rng) const override;
  bool is_free(const State& s) const override;

  /// The noise-free dynamics.
  State advance(const State& s, int push) const;

 private:
  MountainCarConfig cfg_;
};

/// Pushes in the direction of motion (+1 at rest) with probability 1 - eps,
/// otherwise picks one of the three actions uniformly.
class NearOptimalEpsPolicy final : public Policy {
 public:
  explicit NearOptimalEpsPolicy(double eps = 0.2);
  std::string id() const override;
  int action(const State& s, Rng& rng) const override;

 private:
  double eps_;
};

Scenario make_mountain_car_scenario(double eps = 0.2, MountainCarConfig cfg = {});

}  // namespace adaptd
