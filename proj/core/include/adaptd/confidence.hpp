#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "adaptd/approximator.hpp"
#include "adaptd/mdp.hpp"

namespace adaptd {

/// Regularised incomplete beta function I_x(a, b), evaluated with a
/// continued fraction (modified Lentz).
double incomplete_beta(double a, double b, double x);

/// P(|T| <= t) for a Student t variable with `df` degrees of freedom.
double student_t_central_probability(double df, double t);

/// Two-sided quantile: the t with P(|T_df| <= t) = alpha, i.e. the
/// 100 (1 + alpha) / 2 percentile. Found by bisection on the incomplete-beta
/// CDF and memoised per (df, alpha). Throws std::invalid_argument unless
/// df >= 1 and 0 < alpha < 1.
double t_quantile(double df, double alpha);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  double midpoint() const noexcept { return 0.5 * (lower + upper); }
  double half_width() const noexcept { return 0.5 * (upper - lower); }
  bool contains_open(double v) const noexcept { return lower < v && v < upper; }
  bool contains_closed(double v) const noexcept { return lower <= v && v <= upper; }
};

/// Student-t predictive interval for one more draw from the distribution
/// that produced `values`:
///   mean -+ z * s * sqrt(1 + 1/m),  s^2 = sum (v - mean)^2 / (m - 1).
/// z = +inf yields (-inf, +inf) regardless of the spread; z = 0 collapses
/// the interval onto the sample mean. Requires m >= 2.
Interval predictive_interval(std::span<const double> values, double z);

/// m approximators fitted to Monte Carlo targets, each on its own
/// rollout-level resample when bootstrapping is on.
struct Ensemble {
  std::vector<std::unique_ptr<ValueApproximator>> members;
  /// Trajectory indices each member was trained on (a multiset of size n).
  std::vector<std::vector<std::size_t>> resamples;

  std::size_t size() const noexcept { return members.size(); }
  std::vector<double> predictions(const State& s) const;
  double mean(const State& s) const;
};

using ApproximatorFactory = std::function<std::unique_ptr<ValueApproximator>(std::uint64_t seed)>;

struct EnsembleOptions {
  std::size_t members = 3;
  bool bootstrap = true;
  /// Training minibatches per member (iterative approximators only).
  std::size_t budget = 50000;
  std::size_t threads = 1;
};

/// Member i is built by factory(derive_seed(seed, i)) and, when bootstrapping,
/// trained on n trajectories drawn with replacement using its own stream.
/// Throws std::invalid_argument for fewer than two members or an empty
/// dataset, std::runtime_error if the factory fails.
Ensemble train_ensemble(const Dataset& data, double gamma, const ApproximatorFactory& factory,
                        const EnsembleOptions& options, std::uint64_t seed);

/// Frozen per-state interval built from an ensemble.
class ConfidenceFunction {
 public:
  /// Interval at confidence level alpha in (0, 1), z = t_quantile(m - 1, alpha).
  static ConfidenceFunction at_level(std::shared_ptr<const Ensemble> ensemble, double alpha);
  /// Interval with an explicit multiplier; +inf and 0 give the two limits.
  static ConfidenceFunction with_quantile(std::shared_ptr<const Ensemble> ensemble, double z);

  Interval interval(const State& s) const;
  double alpha() const noexcept { return alpha_; }
  double quantile() const noexcept { return z_; }
  const Ensemble& ensemble() const noexcept { return *ensemble_; }

 private:
  ConfidenceFunction(std::shared_ptr<const Ensemble> ensemble, double alpha, double z);

  std::shared_ptr<const Ensemble> ensemble_;
  double alpha_;
  double z_;
};

/// Predicts the ensemble mean. Result of the MC-ensemble baseline.
class EnsembleMeanApprox final : public ValueApproximator {
 public:
  explicit EnsembleMeanApprox(std::vector<std::unique_ptr<ValueApproximator>> members);

  std::string kind() const override { return "ensemble_mean"; }
  double predict(const State& s) const override;
  /// Refits every member on the same data.
  void fit(std::span<const State> states, std::span<const double> targets, std::size_t budget) override;
  std::unique_ptr<ValueApproximator> clone() const override;
  std::unique_ptr<ValueApproximator> fresh(std::uint64_t seed) const override;
  std::string checkpoint_json() const override;

  std::size_t size() const noexcept { return members_.size(); }

 private:
  std::vector<std::unique_ptr<ValueApproximator>> members_;
};

}  // namespace adaptd
