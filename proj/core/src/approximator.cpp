#include "adaptd/approximator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adaptd {

double ValueApproximator::train_batch(std::span<const State>, std::span<const double>) {
  throw std::logic_error(kind() + " approximator does not support incremental training");
}

void check_fit_inputs(std::span<const State> states, std::span<const double> targets) {
  if (states.empty()) throw std::invalid_argument("fit: empty input");
  if (states.size() != targets.size()) throw std::invalid_argument("fit: states and targets differ in length");
  for (double t : targets) {
    if (!std::isfinite(t)) throw std::invalid_argument("fit: non-finite target");
  }
}

CellApproximator::CellApproximator(std::size_t cell_count) : values_(cell_count, 0.0), counts_(cell_count, 0) {
  if (cell_count == 0) throw std::invalid_argument("cell approximator: needs at least one cell");
}

void CellApproximator::fit(std::span<const State> states, std::span<const double> targets, std::size_t) {
  check_fit_inputs(states, targets);
  std::vector<double> sums(cell_count(), 0.0);
  std::vector<std::size_t> counts(cell_count(), 0);
  for (std::size_t i = 0; i < states.size(); ++i) {
    const std::size_t c = cell_of(states[i]);
    sums[c] += targets[i];
    ++counts[c];
  }
  assign_means(sums, counts);
}

void CellApproximator::assign_means(std::span<const double> sums, std::span<const std::size_t> counts) {
  if (sums.size() != cell_count() || counts.size() != cell_count()) {
    throw std::invalid_argument("assign_means: size mismatch");
  }
  for (std::size_t c = 0; c < cell_count(); ++c) {
    values_[c] = counts[c] == 0 ? 0.0 : sums[c] / static_cast<double>(counts[c]);
    counts_[c] = counts[c];
  }
}

void CellApproximator::restore(std::vector<double> values, std::vector<std::size_t> counts) {
  if (values.size() != cell_count() || counts.size() != cell_count()) {
    throw std::invalid_argument("cell approximator: restore size mismatch");
  }
  values_ = std::move(values);
  counts_ = std::move(counts);
}

// --- tabular ----------------------------------------------------------------

TabularApprox::TabularApprox(std::size_t state_count) : CellApproximator(state_count) {}

std::size_t TabularApprox::cell_of(const State& s) const {
  const std::int64_t id = s.id();
  if (id < 0 || static_cast<std::size_t>(id) >= cell_count()) {
    throw std::out_of_range("tabular: state id " + std::to_string(id) + " out of range");
  }
  return static_cast<std::size_t>(id);
}

std::unique_ptr<ValueApproximator> TabularApprox::clone() const { return std::make_unique<TabularApprox>(*this); }

std::unique_ptr<ValueApproximator> TabularApprox::fresh(std::uint64_t) const {
  return std::make_unique<TabularApprox>(cell_count());
}

BiasedTabularApprox::BiasedTabularApprox(std::size_t state_count, std::map<std::int64_t, double> clamps)
    : TabularApprox(state_count), clamps_(std::move(clamps)) {
  for (const auto& [id, value] : clamps_) {
    if (id < 0 || static_cast<std::size_t>(id) >= state_count) throw std::out_of_range("biased tabular: clamp id");
    if (!std::isfinite(value)) throw std::invalid_argument("biased tabular: clamp value must be finite");
  }
}

double BiasedTabularApprox::cell_value(std::size_t cell) const {
  if (auto it = clamps_.find(static_cast<std::int64_t>(cell)); it != clamps_.end()) return it->second;
  return TabularApprox::cell_value(cell);
}

std::unique_ptr<ValueApproximator> BiasedTabularApprox::clone() const {
  return std::make_unique<BiasedTabularApprox>(*this);
}

std::unique_ptr<ValueApproximator> BiasedTabularApprox::fresh(std::uint64_t) const {
  return std::make_unique<BiasedTabularApprox>(cell_count(), clamps_);
}

// --- grid -------------------------------------------------------------------

namespace {

std::size_t grid_cells(double extent, double cell) {
  if (!(extent > 0.0) || !(cell > 0.0)) throw std::invalid_argument("grid: extent and cell size must be positive");
  return static_cast<std::size_t>(std::ceil(extent / cell - 1e-12));
}

}  // namespace

GridApprox::GridApprox(Box box, double cell_size)
    : CellApproximator(grid_cells(box.width(), cell_size) * grid_cells(box.height(), cell_size)),
      box_(box),
      cell_size_(cell_size),
      nx_(grid_cells(box.width(), cell_size)),
      ny_(grid_cells(box.height(), cell_size)) {}

std::size_t GridApprox::cell_of(const State& s) const {
  const auto index = [this](double v, double lo, std::size_t n) {
    const double f = std::floor((v - lo) / cell_size_);
    if (!(f > 0.0)) return std::size_t{0};
    return std::min(static_cast<std::size_t>(f), n - 1);
  };
  return index(s.y(), box_.y_min, ny_) * nx_ + index(s.x(), box_.x_min, nx_);
}

std::unique_ptr<ValueApproximator> GridApprox::clone() const { return std::make_unique<GridApprox>(*this); }

std::unique_ptr<ValueApproximator> GridApprox::fresh(std::uint64_t) const {
  return std::make_unique<GridApprox>(box_, cell_size_);
}

// --- factory ----------------------------------------------------------------

std::string to_string(ApproximatorKind kind) {
  switch (kind) {
    case ApproximatorKind::tabular: return "tabular";
    case ApproximatorKind::biased_tabular: return "biased_tabular";
    case ApproximatorKind::grid: return "grid";
    case ApproximatorKind::mlp: return "mlp";
  }
  return "unknown";
}

ApproximatorKind parse_approximator_kind(std::string_view text) {
  if (text == "tabular") return ApproximatorKind::tabular;
  if (text == "biased_tabular" || text == "biased-tabular") return ApproximatorKind::biased_tabular;
  if (text == "grid") return ApproximatorKind::grid;
  if (text == "mlp") return ApproximatorKind::mlp;
  throw std::invalid_argument("unknown approximator kind '" + std::string(text) + "'");
}

std::unique_ptr<ValueApproximator> make_approximator(const ApproximatorSpec& spec, std::uint64_t seed) {
  switch (spec.kind) {
    case ApproximatorKind::tabular: return std::make_unique<TabularApprox>(spec.state_count);
    case ApproximatorKind::biased_tabular:
      return std::make_unique<BiasedTabularApprox>(spec.state_count, spec.clamps);
    case ApproximatorKind::grid: return std::make_unique<GridApprox>(spec.box, spec.cell_size);
    case ApproximatorKind::mlp: return std::make_unique<MlpApprox>(spec.mlp, seed);
  }
  throw std::invalid_argument("make_approximator: unknown kind");
}

}  // namespace adaptd
