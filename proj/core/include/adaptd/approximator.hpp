#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adaptd/mdp.hpp"
#include "adaptd/mlp.hpp"

namespace adaptd {

class CellApproximator;

/// A trainable map from states to values.
///
/// `fit` minimises the mean squared error to the given targets. Targets are
/// plain numbers, so any bootstrapped target is a constant from the point of
/// view of the optimiser. `predict` is deterministic between fits and safe to
/// call concurrently.
class ValueApproximator {
 public:
  virtual ~ValueApproximator() = default;

  virtual std::string kind() const = 0;
  virtual double predict(const State& s) const = 0;

  /// `budget` is the number of optimiser minibatches for iterative
  /// approximators and is ignored by exact ones. Throws std::invalid_argument
  /// on empty or mismatched input or a non-finite target.
  virtual void fit(std::span<const State> states, std::span<const double> targets, std::size_t budget) = 0;

  virtual std::unique_ptr<ValueApproximator> clone() const = 0;
  /// Same architecture, new independent initialisation.
  virtual std::unique_ptr<ValueApproximator> fresh(std::uint64_t seed) const = 0;

  /// Incremental approximators take one optimiser step per train_batch call,
  /// which returns the minibatch squared error measured before the step.
  virtual bool incremental() const { return false; }
  virtual std::size_t batch_size() const { return 0; }
  virtual double train_batch(std::span<const State> states, std::span<const double> targets);

  /// Non-null for piecewise-constant approximators.
  virtual const CellApproximator* cells() const { return nullptr; }
  virtual CellApproximator* cells() { return nullptr; }

  /// Versioned JSON document with an architecture descriptor and a flat
  /// parameter array; see load_approximator.
  virtual std::string checkpoint_json() const = 0;
};

/// Shared input checks for fit implementations.
void check_fit_inputs(std::span<const State> states, std::span<const double> targets);

/// Piecewise-constant approximator: every state maps to a cell and all states
/// in a cell share one value. Fitting is exact: each visited cell takes the
/// mean of its targets, unvisited cells predict 0.
class CellApproximator : public ValueApproximator {
 public:
  std::size_t cell_count() const noexcept { return values_.size(); }
  virtual std::size_t cell_of(const State& s) const = 0;
  /// Value predicted for every state in `cell`.
  virtual double cell_value(std::size_t cell) const { return values_[cell]; }

  double predict(const State& s) const override { return cell_value(cell_of(s)); }
  void fit(std::span<const State> states, std::span<const double> targets, std::size_t budget) override;

  /// Sets each cell to sums[c] / counts[c] (0 where counts[c] == 0).
  void assign_means(std::span<const double> sums, std::span<const std::size_t> counts);

  std::span<const double> raw_values() const noexcept { return values_; }
  std::span<const std::size_t> visit_counts() const noexcept { return counts_; }
  void restore(std::vector<double> values, std::vector<std::size_t> counts);

  const CellApproximator* cells() const override { return this; }
  CellApproximator* cells() override { return this; }

 protected:
  explicit CellApproximator(std::size_t cell_count);

 private:
  std::vector<double> values_;
  std::vector<std::size_t> counts_;
};

/// One value per discrete state id.
class TabularApprox : public CellApproximator {
 public:
  explicit TabularApprox(std::size_t state_count);

  std::string kind() const override { return "tabular"; }
  std::size_t cell_of(const State& s) const override;
  std::unique_ptr<ValueApproximator> clone() const override;
  std::unique_ptr<ValueApproximator> fresh(std::uint64_t seed) const override;
  std::string checkpoint_json() const override;
};

/// Tabular approximator that cannot represent the true value at some states:
/// each clamped state always predicts its forced value, whatever the data.
class BiasedTabularApprox final : public TabularApprox {
 public:
  BiasedTabularApprox(std::size_t state_count, std::map<std::int64_t, double> clamps);

  std::string kind() const override { return "biased_tabular"; }
  double cell_value(std::size_t cell) const override;
  const std::map<std::int64_t, double>& clamps() const noexcept { return clamps_; }

  std::unique_ptr<ValueApproximator> clone() const override;
  std::unique_ptr<ValueApproximator> fresh(std::uint64_t seed) const override;
  std::string checkpoint_json() const override;

 private:
  std::map<std::int64_t, double> clamps_;
};

/// Piecewise-constant function on a regular 2-D grid of square cells laid
/// from the box's lower-left corner; the last row/column may be partial.
/// Points outside the box are assigned to the nearest edge cell.
class GridApprox final : public CellApproximator {
 public:
  GridApprox(Box box, double cell_size);

  std::string kind() const override { return "grid"; }
  std::size_t cell_of(const State& s) const override;
  std::size_t nx() const noexcept { return nx_; }
  std::size_t ny() const noexcept { return ny_; }
  const Box& box() const noexcept { return box_; }
  double cell_size() const noexcept { return cell_size_; }

  std::unique_ptr<ValueApproximator> clone() const override;
  std::unique_ptr<ValueApproximator> fresh(std::uint64_t seed) const override;
  std::string checkpoint_json() const override;

 private:
  Box box_;
  double cell_size_;
  std::size_t nx_;
  std::size_t ny_;
};

/// 2 -> 50 -> 50 -> 1 ReLU network trained with Adam on uniformly sampled
/// minibatches (shape and optimiser come from MlpConfig).
class MlpApprox final : public ValueApproximator {
 public:
  MlpApprox(MlpConfig cfg, std::uint64_t seed);

  std::string kind() const override { return "mlp"; }
  double predict(const State& s) const override;
  void fit(std::span<const State> states, std::span<const double> targets, std::size_t budget) override;
  bool incremental() const override { return true; }
  std::size_t batch_size() const override { return cfg_.batch_size; }
  double train_batch(std::span<const State> states, std::span<const double> targets) override;

  std::unique_ptr<ValueApproximator> clone() const override;
  std::unique_ptr<ValueApproximator> fresh(std::uint64_t seed) const override;
  std::string checkpoint_json() const override;

  const MlpConfig& config() const noexcept { return cfg_; }
  std::span<const double> params() const noexcept { return params_; }
  void set_params(std::vector<double> params);
  const Adam& optimizer() const noexcept { return adam_; }
  void restore_optimizer(std::size_t t, std::vector<double> m, std::vector<double> v);

  /// Network input for a state after box normalisation.
  std::array<double, 2> normalise(const State& s) const;

 private:
  MlpConfig cfg_;
  std::uint64_t seed_;
  std::vector<double> params_;
  Adam adam_;
  Rng sampler_;
};

enum class ApproximatorKind { tabular, biased_tabular, grid, mlp };

std::string to_string(ApproximatorKind kind);
ApproximatorKind parse_approximator_kind(std::string_view text);

inline constexpr double kDefaultGridCell = 19.0;

struct ApproximatorSpec {
  ApproximatorKind kind = ApproximatorKind::tabular;
  std::size_t state_count = 0;           // tabular kinds
  std::map<std::int64_t, double> clamps;  // biased_tabular
  Box box{};                              // grid
  double cell_size = kDefaultGridCell;    // grid
  MlpConfig mlp;                          // mlp
};

/// Factory used for V-hat and ensemble members alike.
std::unique_ptr<ValueApproximator> make_approximator(const ApproximatorSpec& spec, std::uint64_t seed);

/// Rebuilds an approximator from checkpoint_json output. Throws
/// std::runtime_error on an unknown format, version or kind.
std::unique_ptr<ValueApproximator> load_approximator(std::string_view json_text);
void save_approximator(const std::filesystem::path& path, const ValueApproximator& approx);
std::unique_ptr<ValueApproximator> load_approximator_file(const std::filesystem::path& path);

}  // namespace adaptd
