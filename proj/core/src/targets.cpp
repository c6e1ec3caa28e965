#include "adaptd/targets.hpp"

#include <cmath>
#include <stdexcept>

namespace adaptd {
namespace {

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
}

}  // namespace

std::vector<double> mc_returns(const Trajectory& trajectory, double gamma, double tail) {
  const auto& ts = trajectory.transitions;
  std::vector<double> out(ts.size());
  double g = trajectory.truncated() ? tail : 0.0;
  for (std::size_t t = ts.size(); t-- > 0;) {
    g = ts[t].reward + gamma * g;
    out[t] = g;
  }
  return out;
}

TargetSet mc_targets(const Dataset& data, double gamma, const ValueApproximator* tail_value) {
  check_gamma(gamma);
  if (data.trajectories.empty() || data.transition_count() == 0) throw std::invalid_argument("mc_targets: empty dataset");
  TargetSet out;
  out.reserve(data.transition_count());
  for (std::size_t i = 0; i < data.trajectories.size(); ++i) {
    const Trajectory& tr = data.trajectories[i];
    const bool cut = tr.truncated();
    const double tail = cut && tail_value != nullptr ? tail_value->predict(tr.transitions.back().next_state) : 0.0;
    const std::vector<double> g = mc_returns(tr, gamma, tail);
    for (std::size_t t = 0; t < tr.size(); ++t) out.push_back({tr.transitions[t].state, g[t], i, t, cut});
  }
  return out;
}

double td0_target(const Transition& transition, const ValueApproximator& value, double gamma) {
  if (transition.terminal) return transition.reward;
  const double v = value.predict(transition.next_state);
  if (!std::isfinite(v)) throw std::domain_error("td0_target: non-finite prediction");
  return transition.reward + gamma * v;
}

std::vector<double> lambda_targets(const Trajectory& trajectory, const ValueApproximator& value, double gamma,
                                   double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
  check_gamma(gamma);
  const auto& ts = trajectory.transitions;
  std::vector<double> out(ts.size());
  if (ts.empty()) return out;
  // G_t = r_t + gamma * ((1 - lambda) V(s_{t+1}) + lambda G_{t+1}); the last
  // step bootstraps fully (or not at all when terminal).
  const std::size_t last = ts.size() - 1;
  out[last] = td0_target(ts[last], value, gamma);
  for (std::size_t t = last; t-- > 0;) {
    const double v = value.predict(ts[t].next_state);
    out[t] = ts[t].reward + gamma * ((1.0 - lambda) * v + lambda * out[t + 1]);
  }
  return out;
}

}  // namespace adaptd
