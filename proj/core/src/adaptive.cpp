#include "adaptd/adaptive.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "adaptd/targets.hpp"
#include "json.hpp"
#include "parallel.hpp"

namespace adaptd {
namespace {

using json = nlohmann::json;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Dataset flattened into transition order (trajectory by trajectory).
struct Flat {
  const Dataset* data = nullptr;
  std::vector<State> states;
  std::vector<State> next;
  std::vector<double> rewards;
  std::vector<char> terminal;
  std::vector<std::size_t> begin;  // trajectory offsets, size n + 1

  std::size_t size() const noexcept { return states.size(); }
};

Flat flatten(const Dataset& data) {
  Flat f;
  f.data = &data;
  const std::size_t n = data.transition_count();
  if (data.trajectories.empty() || n == 0) throw std::invalid_argument("evaluator: empty dataset");
  f.states.reserve(n);
  f.next.reserve(n);
  f.rewards.reserve(n);
  f.terminal.reserve(n);
  f.begin.reserve(data.trajectories.size() + 1);
  for (const Trajectory& tr : data.trajectories) {
    f.begin.push_back(f.states.size());
    for (const Transition& t : tr.transitions) {
      f.states.push_back(t.state);
      f.next.push_back(t.next_state);
      f.rewards.push_back(t.reward);
      f.terminal.push_back(t.terminal ? 1 : 0);
    }
  }
  f.begin.push_back(f.states.size());
  return f;
}

enum class RuleKind { fixed, gated, lambda };

// How the regression target of every transition is built from V-hat.
struct Rule {
  RuleKind kind = RuleKind::gated;
  std::span<const double> fixed;
  std::vector<double> lower;
  std::vector<double> upper;
  Fallback fallback = Fallback::midpoint;
  double lambda = 0.0;
};

Rule td0_rule(std::size_t n) {
  Rule r;
  r.kind = RuleKind::gated;
  r.lower.assign(n, -kInf);
  r.upper.assign(n, kInf);
  return r;
}

// A point interval accepts only a target equal to the point.
bool accepts(double td, double lo, double hi) { return (lo < td && td < hi) || (lo == hi && td == lo); }
bool gated_out(double td, double lo, double hi) { return !accepts(td, lo, hi); }

void finish_epoch(EvaluationResult& out, double loss, std::size_t gated, std::size_t seen) {
  const double rate = seen == 0 ? 0.0 : static_cast<double>(gated) / static_cast<double>(seen);
  out.epochs.push_back({loss, rate});
  out.gate_rate = rate;
}

// --- exact approximators: grouped sweeps --------------------------------------

struct Group {
  std::size_t cell;
  std::int64_t next;  // -1 when terminal
  double reward;
  double lower;
  double upper;
  double fixed;
  std::size_t count;

  auto key() const { return std::tie(cell, next, reward, lower, upper, fixed); }
};

void current_values(const CellApproximator& cells, std::vector<double>& v) {
  v.resize(cells.cell_count());
  for (std::size_t c = 0; c < v.size(); ++c) v[c] = cells.cell_value(c);
}

void train_cells_grouped(const Flat& f, double gamma, const Rule& rule, const EvaluatorConfig& cfg,
                         CellApproximator& cells, EvaluationResult& out) {
  const std::size_t n = f.size();
  const std::size_t cell_count = cells.cell_count();
  std::vector<std::size_t> counts(cell_count, 0);
  std::vector<Group> raw;
  raw.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Group g{};
    g.cell = cells.cell_of(f.states[i]);
    g.next = f.terminal[i] ? -1 : static_cast<std::int64_t>(cells.cell_of(f.next[i]));
    g.reward = f.rewards[i];
    if (rule.kind == RuleKind::fixed) {
      g.lower = -kInf;
      g.upper = kInf;
      g.fixed = rule.fixed[i];
    } else {
      g.lower = rule.lower[i];
      g.upper = rule.upper[i];
      g.fixed = 0.0;
    }
    g.count = 1;
    ++counts[g.cell];
    raw.push_back(g);
  }
  std::sort(raw.begin(), raw.end(), [](const Group& a, const Group& b) { return a.key() < b.key(); });
  std::vector<Group> groups;
  for (const Group& g : raw) {
    if (!groups.empty() && groups.back().key() == g.key()) {
      ++groups.back().count;
    } else {
      groups.push_back(g);
    }
  }
  raw.clear();
  raw.shrink_to_fit();

  std::vector<double> v;
  current_values(cells, v);
  std::vector<double> updated;
  std::vector<double> sums(cell_count);
  std::vector<double> target(groups.size());
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::fill(sums.begin(), sums.end(), 0.0);
    std::size_t gated = 0;
    for (std::size_t k = 0; k < groups.size(); ++k) {
      const Group& g = groups[k];
      double t;
      if (rule.kind == RuleKind::fixed) {
        t = g.fixed;
      } else {
        const double td = g.next < 0 ? g.reward : g.reward + gamma * v[static_cast<std::size_t>(g.next)];
        if (gated_out(td, g.lower, g.upper)) gated += g.count;
        t = select_target(td, g.lower, g.upper, rule.fallback);
      }
      target[k] = t;
      sums[g.cell] += static_cast<double>(g.count) * t;
    }
    cells.assign_means(sums, counts);
    current_values(cells, updated);
    double delta = 0.0;
    for (std::size_t c = 0; c < cell_count; ++c) delta = std::max(delta, std::abs(updated[c] - v[c]));
    v.swap(updated);
    double loss = 0.0;
    for (std::size_t k = 0; k < groups.size(); ++k) {
      const double e = target[k] - v[groups[k].cell];
      loss += static_cast<double>(groups[k].count) * e * e;
    }
    finish_epoch(out, loss / static_cast<double>(n), gated, n);
    if (!std::isfinite(delta)) throw std::runtime_error("evaluator: value estimate diverged");
    if (rule.kind == RuleKind::fixed || delta <= cfg.tolerance) {
      out.converged = true;
      return;
    }
  }
}

void train_cells_lambda(const Flat& f, double gamma, const Rule& rule, const EvaluatorConfig& cfg,
                        CellApproximator& cells, EvaluationResult& out) {
  const std::size_t n = f.size();
  const std::size_t cell_count = cells.cell_count();
  std::vector<std::size_t> cell(n);
  std::vector<std::int64_t> next(n);
  std::vector<std::size_t> counts(cell_count, 0);
  for (std::size_t i = 0; i < n; ++i) {
    cell[i] = cells.cell_of(f.states[i]);
    next[i] = f.terminal[i] ? -1 : static_cast<std::int64_t>(cells.cell_of(f.next[i]));
    ++counts[cell[i]];
  }
  const double lambda = rule.lambda;
  std::vector<double> v;
  current_values(cells, v);
  std::vector<double> updated;
  std::vector<double> sums(cell_count);
  std::vector<double> target(n);
  auto bootstrap = [&](std::size_t i) { return next[i] < 0 ? 0.0 : v[static_cast<std::size_t>(next[i])]; };
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t j = 0; j + 1 < f.begin.size(); ++j) {
      const std::size_t b = f.begin[j];
      const std::size_t e = f.begin[j + 1];
      if (b == e) continue;
      double g = f.rewards[e - 1] + gamma * bootstrap(e - 1);
      target[e - 1] = g;
      for (std::size_t i = e - 1; i-- > b;) {
        g = f.rewards[i] + gamma * ((1.0 - lambda) * bootstrap(i) + lambda * g);
        target[i] = g;
      }
    }
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) sums[cell[i]] += target[i];
    cells.assign_means(sums, counts);
    current_values(cells, updated);
    double delta = 0.0;
    for (std::size_t c = 0; c < cell_count; ++c) delta = std::max(delta, std::abs(updated[c] - v[c]));
    v.swap(updated);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) loss += (target[i] - v[cell[i]]) * (target[i] - v[cell[i]]);
    finish_epoch(out, loss / static_cast<double>(n), 0, n);
    if (!std::isfinite(delta)) throw std::runtime_error("evaluator: value estimate diverged");
    if (delta <= cfg.tolerance) {
      out.converged = true;
      return;
    }
  }
}

// --- exact approximators: plain predict / fit sweeps --------------------------

void all_targets(const Flat& f, double gamma, const Rule& rule, const ValueApproximator& v, std::vector<double>& target,
                 std::size_t& gated) {
  const std::size_t n = f.size();
  target.resize(n);
  gated = 0;
  if (rule.kind == RuleKind::fixed) {
    std::copy(rule.fixed.begin(), rule.fixed.end(), target.begin());
    return;
  }
  if (rule.kind == RuleKind::lambda) {
    for (std::size_t j = 0; j < f.data->trajectories.size(); ++j) {
      const std::vector<double> g = lambda_targets(f.data->trajectories[j], v, gamma, rule.lambda);
      std::copy(g.begin(), g.end(), target.begin() + static_cast<std::ptrdiff_t>(f.begin[j]));
    }
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double td = f.terminal[i] ? f.rewards[i] : f.rewards[i] + gamma * v.predict(f.next[i]);
    if (gated_out(td, rule.lower[i], rule.upper[i])) ++gated;
    target[i] = select_target(td, rule.lower[i], rule.upper[i], rule.fallback);
  }
}

void train_exact(const Flat& f, double gamma, const Rule& rule, const EvaluatorConfig& cfg, ValueApproximator& v,
                 EvaluationResult& out) {
  const std::size_t n = f.size();
  std::vector<double> target;
  std::vector<double> before(n);
  for (std::size_t i = 0; i < n; ++i) before[i] = v.predict(f.states[i]);
  std::vector<double> after(n);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::size_t gated = 0;
    all_targets(f, gamma, rule, v, target, gated);
    v.fit(f.states, target, cfg.budget);
    double delta = 0.0;
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      after[i] = v.predict(f.states[i]);
      delta = std::max(delta, std::abs(after[i] - before[i]));
      loss += (target[i] - after[i]) * (target[i] - after[i]);
    }
    before.swap(after);
    finish_epoch(out, loss / static_cast<double>(n), gated, n);
    if (!std::isfinite(delta)) throw std::runtime_error("evaluator: value estimate diverged");
    if (rule.kind == RuleKind::fixed || delta <= cfg.tolerance) {
      out.converged = true;
      return;
    }
  }
}

// --- incremental approximators: minibatch steps -------------------------------

void train_incremental(const Flat& f, double gamma, const Rule& rule, const EvaluatorConfig& cfg,
                       std::uint64_t vseed, ValueApproximator& v, EvaluationResult& out) {
  const std::size_t n = f.size();
  const std::size_t batch = v.batch_size();
  if (batch == 0) throw std::logic_error("evaluator: incremental approximator without a batch size");
  const std::size_t epoch_len = std::max<std::size_t>(1, (n + batch - 1) / batch);
  const bool whole_epoch = rule.kind == RuleKind::lambda ||
                           (rule.kind == RuleKind::gated && cfg.refresh == TargetRefresh::per_epoch);
  Rng rng = make_rng(derive_seed(vseed, 2));
  std::vector<double> target;
  std::vector<State> batch_states(batch);
  std::vector<double> batch_targets(batch);
  double loss = 0.0;
  std::size_t steps = 0;
  std::size_t gated = 0;
  std::size_t seen = 0;
  for (std::size_t step = 0; step < cfg.budget; ++step) {
    if (step % epoch_len == 0) {
      if (step > 0) {
        finish_epoch(out, loss / static_cast<double>(steps), gated, seen);
        loss = 0.0;
        steps = 0;
        gated = 0;
        seen = 0;
      }
      if (whole_epoch) {
        all_targets(f, gamma, rule, v, target, gated);
        seen = n;
      }
    }
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t i = uniform_index(rng, n);
      batch_states[b] = f.states[i];
      if (rule.kind == RuleKind::fixed) {
        batch_targets[b] = rule.fixed[i];
      } else if (whole_epoch) {
        batch_targets[b] = target[i];
      } else {
        const double td = f.terminal[i] ? f.rewards[i] : f.rewards[i] + gamma * v.predict(f.next[i]);
        if (gated_out(td, rule.lower[i], rule.upper[i])) ++gated;
        ++seen;
        batch_targets[b] = select_target(td, rule.lower[i], rule.upper[i], rule.fallback);
      }
    }
    loss += v.train_batch(batch_states, batch_targets);
    ++steps;
  }
  if (steps > 0) finish_epoch(out, loss / static_cast<double>(steps), gated, seen);
  out.converged = true;
}

EvaluationResult train_value(const Flat& f, double gamma, const Rule& rule, const EvaluatorConfig& cfg,
                             std::uint64_t seed) {
  EvaluationResult out;
  const std::uint64_t vseed = value_seed(seed);
  out.value = make_approximator(cfg.approximator, vseed);
  ValueApproximator& v = *out.value;
  if (v.incremental()) {
    train_incremental(f, gamma, rule, cfg, vseed, v, out);
  } else if (CellApproximator* cells = v.cells(); cells != nullptr && cfg.compile_cells) {
    if (rule.kind == RuleKind::lambda) {
      train_cells_lambda(f, gamma, rule, cfg, *cells, out);
    } else {
      train_cells_grouped(f, gamma, rule, cfg, *cells, out);
    }
  } else {
    train_exact(f, gamma, rule, cfg, v, out);
  }
  return out;
}

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("evaluator: gamma must lie in (0, 1]");
}

std::shared_ptr<const Ensemble> build_ensemble(const Dataset& data, double gamma, const EvaluatorConfig& cfg,
                                               std::uint64_t seed) {
  const ApproximatorSpec spec = cfg.approximator;
  const ApproximatorFactory factory = [spec](std::uint64_t s) { return make_approximator(spec, s); };
  EnsembleOptions opts;
  opts.members = cfg.members;
  opts.bootstrap = cfg.bootstrap;
  opts.budget = cfg.budget;
  opts.threads = cfg.threads;
  return std::make_shared<const Ensemble>(train_ensemble(data, gamma, factory, opts, ensemble_seed(seed)));
}

template <class E>
E parse_enum(std::string_view text, std::initializer_list<E> all, const char* what) {
  for (E e : all) {
    if (to_string(e) == text) return e;
  }
  throw std::invalid_argument(std::string("unknown ") + what + ": " + std::string(text));
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::mc: return "mc";
    case Algorithm::td0: return "td0";
    case Algorithm::td_lambda: return "td_lambda";
    case Algorithm::mc_ensemble: return "mc_ensemble";
    case Algorithm::adaptive_td: return "adaptive_td";
  }
  throw std::invalid_argument("unknown algorithm");
}

std::string to_string(Fallback f) { return f == Fallback::midpoint ? "midpoint" : "clip"; }
std::string to_string(TargetRefresh r) { return r == TargetRefresh::per_minibatch ? "per_minibatch" : "per_epoch"; }

Algorithm parse_algorithm(std::string_view text) {
  return parse_enum(text,
                    {Algorithm::mc, Algorithm::td0, Algorithm::td_lambda, Algorithm::mc_ensemble,
                     Algorithm::adaptive_td},
                    "algorithm");
}

Fallback parse_fallback(std::string_view text) {
  return parse_enum(text, {Fallback::midpoint, Fallback::clip}, "fallback");
}

TargetRefresh parse_refresh(std::string_view text) {
  return parse_enum(text, {TargetRefresh::per_minibatch, TargetRefresh::per_epoch}, "target refresh");
}

void EvaluatorConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("config: lambda must lie in [0, 1]");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("config: alpha must lie in (0, 1)");
  if (quantile && (std::isnan(*quantile) || *quantile < 0.0)) throw std::invalid_argument("config: quantile must be >= 0");
  if (members < 2) throw std::invalid_argument("config: ensemble needs at least two members");
  if (epochs == 0) throw std::invalid_argument("config: epochs must be positive");
  if (!(tolerance >= 0.0)) throw std::invalid_argument("config: tolerance must be >= 0");
  if (budget == 0) throw std::invalid_argument("config: budget must be positive");
}

double select_target(double td, double lower, double upper, Fallback fallback) {
  if (lower > upper) throw std::invalid_argument("select_target: inverted interval");
  if (accepts(td, lower, upper)) return td;
  if (fallback == Fallback::midpoint) return 0.5 * (lower + upper);
  return std::abs(td - lower) <= std::abs(td - upper) ? lower : upper;
}

std::uint64_t value_seed(std::uint64_t seed) { return derive_seed(seed, stable_hash("value")); }
std::uint64_t ensemble_seed(std::uint64_t seed) { return derive_seed(seed, stable_hash("ensemble")); }

EvaluationResult run_gated_td(const Dataset& data, double gamma, const ConfidenceFunction& cf,
                              const EvaluatorConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  check_gamma(gamma);
  const Flat f = flatten(data);
  Rule rule;
  rule.kind = RuleKind::gated;
  rule.fallback = cfg.fallback;
  rule.lower.resize(f.size());
  rule.upper.resize(f.size());
  detail::parallel_for(f.size(), cfg.threads, [&](std::size_t i) {
    const Interval iv = cf.interval(f.states[i]);
    rule.lower[i] = iv.lower;
    rule.upper[i] = iv.upper;
  });
  return train_value(f, gamma, rule, cfg, seed);
}

EvaluationResult run_adaptive_td(const Dataset& data, double gamma, const EvaluatorConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  check_gamma(gamma);
  const auto start = std::chrono::steady_clock::now();
  auto ensemble = build_ensemble(data, gamma, cfg, seed);
  const ConfidenceFunction cf = cfg.quantile ? ConfidenceFunction::with_quantile(ensemble, *cfg.quantile)
                                             : ConfidenceFunction::at_level(ensemble, cfg.alpha);
  EvaluationResult out = run_gated_td(data, gamma, cf, cfg, seed);
  out.ensemble = std::move(ensemble);
  out.wall_time_ms = elapsed_ms(start);
  return out;
}

EvaluationResult fit_fixed_targets(const Dataset& data, std::span<const double> targets, const EvaluatorConfig& cfg,
                                   std::uint64_t seed) {
  cfg.validate();
  const Flat f = flatten(data);
  if (targets.size() != f.size()) throw std::invalid_argument("fit_fixed_targets: one target per transition");
  for (double t : targets) {
    if (!std::isfinite(t)) throw std::invalid_argument("fit_fixed_targets: non-finite target");
  }
  Rule rule;
  rule.kind = RuleKind::fixed;
  rule.fixed = targets;
  return train_value(f, 1.0, rule, cfg, seed);
}

EvaluationResult run_baseline(const Dataset& data, double gamma, const EvaluatorConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  check_gamma(gamma);
  const auto start = std::chrono::steady_clock::now();
  EvaluationResult out;
  switch (cfg.algorithm) {
    case Algorithm::mc: {
      const TargetSet ts = mc_targets(data, gamma);
      std::vector<double> values(ts.size());
      for (std::size_t i = 0; i < ts.size(); ++i) values[i] = ts[i].value;
      out = fit_fixed_targets(data, values, cfg, seed);
      break;
    }
    case Algorithm::td0: {
      const Flat f = flatten(data);
      out = train_value(f, gamma, td0_rule(f.size()), cfg, seed);
      break;
    }
    case Algorithm::td_lambda: {
      const Flat f = flatten(data);
      Rule rule;
      rule.kind = RuleKind::lambda;
      rule.lambda = cfg.lambda;
      out = train_value(f, gamma, rule, cfg, seed);
      break;
    }
    case Algorithm::mc_ensemble: {
      auto ensemble = build_ensemble(data, gamma, cfg, seed);
      std::vector<std::unique_ptr<ValueApproximator>> copies;
      for (const auto& m : ensemble->members) copies.push_back(m->clone());
      out.value = std::make_unique<EnsembleMeanApprox>(std::move(copies));
      out.ensemble = std::move(ensemble);
      out.converged = true;
      break;
    }
    case Algorithm::adaptive_td:
      throw std::invalid_argument("run_baseline: adaptive_td is not a baseline");
  }
  out.wall_time_ms = elapsed_ms(start);
  return out;
}

EvaluationResult evaluate(const Dataset& data, double gamma, const EvaluatorConfig& cfg, std::uint64_t seed) {
  if (cfg.algorithm == Algorithm::adaptive_td) return run_adaptive_td(data, gamma, cfg, seed);
  return run_baseline(data, gamma, cfg, seed);
}

std::string run_record_json(const EvaluatorConfig& cfg, const EvaluationResult& result, std::uint64_t seed,
                            const std::string& env_id, std::size_t n_rollouts) {
  json config = {
      {"algorithm", to_string(cfg.algorithm)},
      {"lambda", cfg.lambda},
      {"alpha", cfg.alpha},
      {"quantile", cfg.quantile ? finite_or_null(*cfg.quantile) : json(nullptr)},
      {"quantile_infinite", cfg.quantile && std::isinf(*cfg.quantile)},
      {"members", cfg.members},
      {"bootstrap", cfg.bootstrap},
      {"fallback", to_string(cfg.fallback)},
      {"epochs", cfg.epochs},
      {"tolerance", cfg.tolerance},
      {"budget", cfg.budget},
      {"refresh", to_string(cfg.refresh)},
      {"approximator", to_string(cfg.approximator.kind)},
  };
  json epochs = json::array();
  for (const EpochLog& e : result.epochs) epochs.push_back({{"loss", e.loss}, {"gate_rate", e.gate_rate}});
  json doc = {
      {"format", "adaptd-run"},
      {"version", 1},
      {"env_id", env_id},
      {"n_rollouts", n_rollouts},
      {"seed", seed},
      {"config", config},
      {"epochs", epochs},
      {"gate_rate", result.gate_rate},
      {"converged", result.converged},
      {"wall_time_ms", result.wall_time_ms},
  };
  return doc.dump(2);
}

void write_run_artifacts(const std::filesystem::path& dir, const EvaluatorConfig& cfg, const EvaluationResult& result,
                         std::uint64_t seed, const std::string& env_id, std::size_t n_rollouts) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "run.json");
    if (!out) throw std::runtime_error("cannot write " + (dir / "run.json").string());
    out << run_record_json(cfg, result, seed, env_id, n_rollouts) << '\n';
  }
  if (result.value) save_approximator(dir / "value.json", *result.value);
  if (result.ensemble) {
    for (std::size_t i = 0; i < result.ensemble->size(); ++i) {
      save_approximator(dir / ("ensemble_" + std::to_string(i) + ".json"), *result.ensemble->members[i]);
    }
  }
}

}  // namespace adaptd
