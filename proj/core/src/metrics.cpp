#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "adaptd/eval.hpp"

namespace adaptd {

double msve(const ValueApproximator& v, const GroundTruth& gt, std::span<const double> weights) {
  const std::size_t n = gt.size();
  if (n == 0 || gt.eval.size() != n) throw std::invalid_argument("msve: empty ground truth");
  if (!weights.empty() && weights.size() != n) throw std::invalid_argument("msve: one weight per state");
  double total = 0.0;
  double mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("msve: weights must be finite and >= 0");
    const double e = v.predict(gt.eval.states[i]) - gt.values[i];
    total += w * e * e;
    mass += w;
  }
  if (!(mass > 0.0)) throw std::invalid_argument("msve: weights sum to zero");
  return total / mass;
}

VisitSplit msve_by_visits(const ValueApproximator& v, const GroundTruth& gt) {
  if (gt.size() == 0) throw std::invalid_argument("msve: empty ground truth");
  const CellApproximator* cells = v.cells();
  VisitSplit out;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const State& s = gt.eval.states[i];
    const double e = v.predict(s) - gt.values[i];
    const bool seen = cells == nullptr || cells->visit_counts()[cells->cell_of(s)] > 0;
    if (seen) {
      out.visited_msve += e * e;
      ++out.visited;
    } else {
      out.unvisited_msve += e * e;
      ++out.unvisited;
    }
  }
  if (out.visited > 0) out.visited_msve /= static_cast<double>(out.visited);
  if (out.unvisited > 0) out.unvisited_msve /= static_cast<double>(out.unvisited);
  return out;
}

Scores normalize_by_max(const Scores& msve) {
  if (msve.empty()) throw std::invalid_argument("normalize_by_max: no scores");
  double hi = 0.0;
  for (const auto& [name, value] : msve) hi = std::max(hi, value);
  if (!(hi > 0.0)) throw std::invalid_argument("normalize_by_max: all scores are zero");
  Scores out;
  for (const auto& [name, value] : msve) out[name] = value / hi;
  return out;
}

MinMaxScores normalize_minmax(const Scores& msve) {
  if (msve.empty()) throw std::invalid_argument("normalize_minmax: no scores");
  double lo = msve.begin()->second;
  double hi = lo;
  for (const auto& [name, value] : msve) {
    lo = std::min(lo, value);
    hi = std::max(hi, value);
  }
  MinMaxScores out;
  out.tied = !(hi > lo);
  for (const auto& [name, value] : msve) out.values[name] = out.tied ? 0.0 : (value - lo) / (hi - lo);
  return out;
}

Scores average_scores(std::span<const Scores> per_scenario) {
  if (per_scenario.empty()) throw std::invalid_argument("average_scores: no scenarios");
  Scores out;
  for (const auto& [name, value] : per_scenario.front()) out[name] = 0.0;
  for (const Scores& s : per_scenario) {
    if (s.size() != out.size()) throw std::invalid_argument("average_scores: scenarios score different algorithms");
    for (const auto& [name, value] : s) {
      auto it = out.find(name);
      if (it == out.end()) throw std::invalid_argument("average_scores: scenarios score different algorithms");
      it->second += value;
    }
  }
  for (auto& [name, value] : out) value /= static_cast<double>(per_scenario.size());
  return out;
}

std::string to_string(Violation v) {
  switch (v) {
    case Violation::inside: return "inside";
    case Violation::over: return "over";
    case Violation::under: return "under";
  }
  throw std::invalid_argument("unknown violation label");
}

std::vector<ViolationCell> violation_map(const ConfidenceFunction& cf, const EvalStates& states,
                                         std::span<const double> reference) {
  if (reference.size() != states.size()) throw std::invalid_argument("violation_map: one reference per state");
  std::vector<ViolationCell> out;
  out.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const Interval iv = cf.interval(states.states[i]);
    ViolationCell c;
    c.cell = states.cells[i];
    c.reference = reference[i];
    c.lower = iv.lower;
    c.upper = iv.upper;
    if (reference[i] > iv.upper) {
      c.label = Violation::over;
    } else if (reference[i] < iv.lower) {
      c.label = Violation::under;
    } else {
      c.label = Violation::inside;
    }
    out.push_back(c);
  }
  return out;
}

void write_violation_map(std::ostream& out, std::span<const ViolationCell> cells) {
  out << "# over: reference > upper; under: reference < lower\n";
  out << "cell_x,cell_y,label\n";
  for (const ViolationCell& c : cells) out << c.cell[0] << ',' << c.cell[1] << ',' << to_string(c.label) << '\n';
}

}  // namespace adaptd
