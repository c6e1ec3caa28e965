#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "adaptd/envs.hpp"

namespace adaptd {

MountainCarEnv::MountainCarEnv(MountainCarConfig cfg) : cfg_(cfg) {
  if (!(cfg_.gamma > 0.0 && cfg_.gamma <= 1.0)) throw std::invalid_argument("mountain car: gamma must lie in (0, 1]");
}

StateSpace MountainCarEnv::state_space() const {
  return StateSpace{0, Box{kMinPosition, kMaxPosition, -kMaxSpeed, kMaxSpeed}};
}

State MountainCarEnv::initial_state(Rng& rng) const {
  const double position = kMinPosition + uniform01(rng) * (cfg_.goal_position - kMinPosition);
  const double velocity = -kMaxSpeed + uniform01(rng) * (2.0 * kMaxSpeed);
  return State::point(position, velocity);
}

State MountainCarEnv::advance(const State& s, int push) const {
  double velocity = s.y() + kForce * push - kGravity * std::cos(3.0 * s.x());
  velocity = std::clamp(velocity, -kMaxSpeed, kMaxSpeed);
  double position = std::clamp(s.x() + velocity, kMinPosition, kMaxPosition);
  if (position <= kMinPosition && velocity < 0.0) velocity = 0.0;
  return State::point(position, velocity);
}

StepResult MountainCarEnv::step(const State& s, int action, Rng&) const {
  if (action < 0 || action > 2) throw std::out_of_range("mountain car: invalid action");
  State next = advance(s, action - 1);
  const bool done = next.x() >= cfg_.goal_position;
  return {std::move(next), -1.0, done};
}

bool MountainCarEnv::is_free(const State& s) const {
  return !s.is_discrete() && s.x() >= kMinPosition && s.x() < cfg_.goal_position && std::abs(s.y()) <= kMaxSpeed;
}

NearOptimalEpsPolicy::NearOptimalEpsPolicy(double eps) : eps_(eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
}

std::string NearOptimalEpsPolicy::id() const { return "near-optimal-eps" + std::to_string(eps_); }

int NearOptimalEpsPolicy::action(const State& s, Rng& rng) const {
  if (eps_ > 0.0 && uniform01(rng) < eps_) return static_cast<int>(uniform_index(rng, 3));
  return s.y() < 0.0 ? 0 : 2;
}

Scenario make_mountain_car_scenario(double eps, MountainCarConfig cfg) {
  return {std::make_shared<MountainCarEnv>(cfg), std::make_shared<NearOptimalEpsPolicy>(eps)};
}

}  // namespace adaptd
