#include "adaptd/confidence.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "adaptd/targets.hpp"
#include "parallel.hpp"

namespace adaptd {

Interval predictive_interval(std::span<const double> values, double z) {
  const std::size_t m = values.size();
  if (m < 2) throw std::invalid_argument("predictive_interval: need at least two values");
  if (std::isnan(z) || z < 0.0) throw std::invalid_argument("predictive_interval: z must be >= 0");
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(m);
  if (std::isinf(z)) {
    return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  }
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(m - 1));
  const double half = z * sd * std::sqrt(1.0 + 1.0 / static_cast<double>(m));
  return {mean - half, mean + half};
}

std::vector<double> Ensemble::predictions(const State& s) const {
  std::vector<double> out;
  out.reserve(members.size());
  for (const auto& m : members) out.push_back(m->predict(s));
  return out;
}

double Ensemble::mean(const State& s) const {
  double total = 0.0;
  for (const auto& m : members) total += m->predict(s);
  return total / static_cast<double>(members.size());
}

Ensemble train_ensemble(const Dataset& data, double gamma, const ApproximatorFactory& factory,
                        const EnsembleOptions& options, std::uint64_t seed) {
  if (options.members < 2) throw std::invalid_argument("train_ensemble: need at least two members");
  const std::size_t n = data.trajectories.size();
  if (n == 0) throw std::invalid_argument("train_ensemble: empty dataset");

  Ensemble ens;
  ens.members.resize(options.members);
  ens.resamples.resize(options.members);
  for (std::size_t i = 0; i < options.members; ++i) {
    auto& picks = ens.resamples[i];
    picks.resize(n);
    if (options.bootstrap) {
      Rng rng = make_rng(derive_seed(seed, i, 1));
      for (auto& p : picks) p = uniform_index(rng, n);
    } else {
      std::iota(picks.begin(), picks.end(), std::size_t{0});
    }
  }

  detail::parallel_for(options.members, options.threads, [&](std::size_t i) {
    std::unique_ptr<ValueApproximator> member;
    try {
      member = factory(derive_seed(seed, i));
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("train_ensemble: factory failed: ") + e.what());
    }
    if (!member) throw std::runtime_error("train_ensemble: factory returned no approximator");

    Dataset sample;
    sample.env_id = data.env_id;
    sample.policy_id = data.policy_id;
    sample.seed = data.seed;
    sample.trajectories.reserve(n);
    for (std::size_t p : ens.resamples[i]) sample.trajectories.push_back(data.trajectories[p]);

    const TargetSet targets = mc_targets(sample, gamma);
    std::vector<State> states;
    std::vector<double> values;
    states.reserve(targets.size());
    values.reserve(targets.size());
    for (const auto& t : targets) {
      states.push_back(t.state);
      values.push_back(t.value);
    }
    member->fit(states, values, options.budget);
    ens.members[i] = std::move(member);
  });
  return ens;
}

ConfidenceFunction::ConfidenceFunction(std::shared_ptr<const Ensemble> ensemble, double alpha, double z)
    : ensemble_(std::move(ensemble)), alpha_(alpha), z_(z) {
  if (!ensemble_ || ensemble_->size() < 2) throw std::invalid_argument("confidence function: need an ensemble of >= 2");
}

ConfidenceFunction ConfidenceFunction::at_level(std::shared_ptr<const Ensemble> ensemble, double alpha) {
  if (!ensemble) throw std::invalid_argument("confidence function: null ensemble");
  const double z = t_quantile(static_cast<double>(ensemble->size() - 1), alpha);
  return ConfidenceFunction(std::move(ensemble), alpha, z);
}

ConfidenceFunction ConfidenceFunction::with_quantile(std::shared_ptr<const Ensemble> ensemble, double z) {
  if (std::isnan(z) || z < 0.0) throw std::invalid_argument("confidence function: z must be >= 0");
  return ConfidenceFunction(std::move(ensemble), std::numeric_limits<double>::quiet_NaN(), z);
}

Interval ConfidenceFunction::interval(const State& s) const {
  const std::vector<double> v = ensemble_->predictions(s);
  return predictive_interval(v, z_);
}

EnsembleMeanApprox::EnsembleMeanApprox(std::vector<std::unique_ptr<ValueApproximator>> members)
    : members_(std::move(members)) {
  if (members_.empty()) throw std::invalid_argument("ensemble mean: no members");
  for (const auto& m : members_) {
    if (!m) throw std::invalid_argument("ensemble mean: null member");
  }
}

double EnsembleMeanApprox::predict(const State& s) const {
  double total = 0.0;
  for (const auto& m : members_) total += m->predict(s);
  return total / static_cast<double>(members_.size());
}

void EnsembleMeanApprox::fit(std::span<const State> states, std::span<const double> targets, std::size_t budget) {
  check_fit_inputs(states, targets);
  for (auto& m : members_) m->fit(states, targets, budget);
}

std::unique_ptr<ValueApproximator> EnsembleMeanApprox::clone() const {
  std::vector<std::unique_ptr<ValueApproximator>> copy;
  for (const auto& m : members_) copy.push_back(m->clone());
  return std::make_unique<EnsembleMeanApprox>(std::move(copy));
}

std::unique_ptr<ValueApproximator> EnsembleMeanApprox::fresh(std::uint64_t seed) const {
  std::vector<std::unique_ptr<ValueApproximator>> copy;
  for (std::size_t i = 0; i < members_.size(); ++i) copy.push_back(members_[i]->fresh(derive_seed(seed, i)));
  return std::make_unique<EnsembleMeanApprox>(std::move(copy));
}

}  // namespace adaptd
