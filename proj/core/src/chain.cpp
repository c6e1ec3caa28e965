#include <cmath>
#include <stdexcept>
#include <string>

#include "adaptd/envs.hpp"

namespace adaptd {

ChainEnv::ChainEnv(ChainConfig cfg) : cfg_(cfg) {
  if (cfg_.k < 2) throw std::invalid_argument("chain: k must be > 1");
  if (cfg_.p < 1 || cfg_.p >= cfg_.k) throw std::invalid_argument("chain: p must satisfy 0 < p < k");
  if (!(cfg_.sigma >= 0.0) || !std::isfinite(cfg_.sigma)) throw std::invalid_argument("chain: sigma must be >= 0");
  if (!std::isfinite(cfg_.mu)) throw std::invalid_argument("chain: mu must be finite");
}

State ChainEnv::branch(int i) const {
  if (i < 1 || i > cfg_.k) throw std::out_of_range("chain: branch index out of range");
  return State::discrete(i);
}

State ChainEnv::bottleneck(int j) const {
  if (j != 1 && j != 2) throw std::out_of_range("chain: bottleneck index must be 1 or 2");
  return State::discrete(cfg_.k + j);
}

std::string ChainEnv::id() const {
  return "chain-k" + std::to_string(cfg_.k) + "-p" + std::to_string(cfg_.p);
}

StateSpace ChainEnv::state_space() const { return StateSpace{state_count(), {}}; }

State ChainEnv::initial_state(Rng&) const { return start(); }

StepResult ChainEnv::step(const State& s, int action, Rng& rng) const {
  const std::int64_t id = s.id();
  const std::int64_t k = cfg_.k;
  if (id == 0) {
    if (action < 0 || action >= cfg_.k) throw std::out_of_range("chain: invalid action at s0");
    return {State::discrete(action + 1), 0.0, false};
  }
  if (id >= 1 && id <= k) return {bottleneck(id <= cfg_.p ? 1 : 2), 0.0, false};
  if (id == k + 1 || id == k + 2) return {merge(), 0.0, false};
  if (id == k + 3) return {end(), cfg_.mu + cfg_.sigma * standard_normal(rng), true};
  throw std::out_of_range("chain: step from terminal or unknown state " + std::to_string(id));
}

bool ChainEnv::is_free(const State& s) const {
  return s.is_discrete() && s.id() >= 0 && s.id() <= cfg_.k + 3;
}

std::optional<double> ChainEnv::true_value(const State& s) const {
  if (!s.is_discrete() || s.id() < 0 || s.id() > cfg_.k + 4) return std::nullopt;
  return s.id() == cfg_.k + 4 ? 0.0 : cfg_.mu;
}

ChainUniformPolicy::ChainUniformPolicy(int k) : k_(k) {
  if (k < 2) throw std::invalid_argument("chain policy: k must be > 1");
}

int ChainUniformPolicy::action(const State& s, Rng& rng) const {
  if (s.id() != 0) return 0;
  return static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(k_)));
}

Scenario make_chain_scenario(const ChainConfig& cfg) {
  return {std::make_shared<ChainEnv>(cfg), std::make_shared<ChainUniformPolicy>(cfg.k)};
}

}  // namespace adaptd
