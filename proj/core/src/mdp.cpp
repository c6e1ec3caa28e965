#include "adaptd/mdp.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "parallel.hpp"

namespace adaptd {

std::int64_t State::id() const {
  if (const auto* id = std::get_if<std::int64_t>(&value_)) return *id;
  throw std::logic_error("State::id called on a continuous state");
}

const State::Coords& State::coords() const {
  if (const auto* c = std::get_if<Coords>(&value_)) return *c;
  throw std::logic_error("State::coords called on a discrete state");
}

std::string to_string(const State& s) {
  std::ostringstream out;
  if (s.is_discrete()) {
    out << '#' << s.id();
  } else {
    out << '(' << s.x() << ", " << s.y() << ')';
  }
  return out.str();
}

void validate(const Trajectory& trajectory) {
  const auto& ts = trajectory.transitions;
  for (std::size_t t = 0; t < ts.size(); ++t) {
    if (!std::isfinite(ts[t].reward)) {
      throw std::invalid_argument("trajectory: non-finite reward at step " + std::to_string(t));
    }
    if (ts[t].terminal && t + 1 != ts.size()) {
      throw std::invalid_argument("trajectory: terminal flag before the last step");
    }
    if (t + 1 < ts.size() && !(ts[t].next_state == ts[t + 1].state)) {
      throw std::invalid_argument("trajectory: broken chain at step " + std::to_string(t));
    }
  }
}

std::size_t Dataset::transition_count() const noexcept {
  std::size_t total = 0;
  for (const auto& tr : trajectories) total += tr.size();
  return total;
}

bool Environment::is_free(const State&) const { return true; }

std::optional<double> Environment::true_value(const State&) const { return std::nullopt; }

Trajectory rollout(const Environment& env, const Policy& policy, const State& start,
                   std::size_t max_steps, Rng& rng) {
  if (max_steps == 0) throw std::invalid_argument("rollout: max_steps must be >= 1");
  Trajectory out;
  State s = start;
  for (std::size_t t = 0; t < max_steps; ++t) {
    const int a = policy.action(s, rng);
    StepResult r = env.step(s, a, rng);
    const bool done = r.terminal;
    out.transitions.push_back(Transition{s, a, r.reward, r.next, done});
    if (done) break;
    s = std::move(r.next);
  }
  return out;
}

Dataset collect_trajectories(const Environment& env, const Policy& policy, std::size_t n,
                             std::size_t max_steps, std::uint64_t seed, std::size_t threads) {
  if (n == 0) throw std::invalid_argument("collect_trajectories: n must be >= 1");
  if (max_steps == 0) throw std::invalid_argument("collect_trajectories: max_steps must be >= 1");
  Dataset data;
  data.env_id = env.id();
  data.policy_id = policy.id();
  data.seed = seed;
  data.trajectories.resize(n);
  detail::parallel_for(n, threads, [&](std::size_t i) {
    Rng rng = make_rng(derive_seed(seed, i));
    const State start = env.initial_state(rng);
    data.trajectories[i] = rollout(env, policy, start, max_steps, rng);
  });
  return data;
}

double discounted_return(const Trajectory& trajectory, double gamma, std::size_t from) {
  const auto& ts = trajectory.transitions;
  if (from >= ts.size()) {
    throw std::out_of_range("discounted_return: index " + std::to_string(from) + " outside trajectory of length " +
                            std::to_string(ts.size()));
  }
  // Backward accumulation matches the recursive identity bit for bit.
  double g = 0.0;
  for (std::size_t t = ts.size(); t-- > from;) g = ts[t].reward + gamma * g;
  return g;
}

}  // namespace adaptd
