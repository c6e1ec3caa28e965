#include "adaptd/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>

#include "adaptd/targets.hpp"
#include "csv.hpp"
#include "json.hpp"
#include "parallel.hpp"
#include "scenario_json.hpp"

namespace adaptd {
namespace {

using json = nlohmann::json;

const std::set<std::string> kEvaluatorKeys = {"alpha",  "quantile", "members",   "bootstrap", "fallback",
                                              "lambda", "epochs",   "tolerance", "budget",    "refresh",
                                              "threads"};

void apply_evaluator_json(EvaluatorConfig& cfg, const json& j) {
  for (const auto& [key, value] : j.items()) {
    if (!kEvaluatorKeys.contains(key)) throw std::invalid_argument("evaluator: unknown key '" + key + "'");
  }
  cfg.alpha = j.value("alpha", cfg.alpha);
  if (j.contains("quantile")) {
    const json& q = j.at("quantile");
    if (q.is_null()) {
      cfg.quantile.reset();
    } else if (q.is_string() && q.get<std::string>() == "inf") {
      cfg.quantile = std::numeric_limits<double>::infinity();
    } else {
      cfg.quantile = q.get<double>();
    }
  }
  cfg.members = j.value("members", cfg.members);
  cfg.bootstrap = j.value("bootstrap", cfg.bootstrap);
  if (j.contains("fallback")) cfg.fallback = parse_fallback(j.at("fallback").get<std::string>());
  cfg.lambda = j.value("lambda", cfg.lambda);
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.tolerance = j.value("tolerance", cfg.tolerance);
  cfg.budget = j.value("budget", cfg.budget);
  if (j.contains("refresh")) cfg.refresh = parse_refresh(j.at("refresh").get<std::string>());
  cfg.threads = j.value("threads", cfg.threads);
}

json evaluator_json(const EvaluatorConfig& cfg) {
  json q = nullptr;
  if (cfg.quantile) q = std::isinf(*cfg.quantile) ? json("inf") : json(*cfg.quantile);
  return {{"alpha", cfg.alpha},         {"quantile", q},           {"members", cfg.members},
          {"bootstrap", cfg.bootstrap}, {"fallback", to_string(cfg.fallback)}, {"lambda", cfg.lambda},
          {"epochs", cfg.epochs},       {"tolerance", cfg.tolerance}, {"budget", cfg.budget},
          {"refresh", to_string(cfg.refresh)}, {"threads", cfg.threads}};
}

std::string file_stem(const std::string& name) {
  std::string out = name;
  for (char& c : out) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.')) c = '_';
  }
  return out;
}

struct Cell {
  std::size_t env = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

EvaluatorConfig cell_config(const SweepConfig& cfg, std::size_t env_index, const AlgorithmSpec& algorithm,
                            const BuiltScenario& built) {
  EvaluatorConfig ec = cfg.envs[env_index].evaluator;
  ec.algorithm = algorithm.algorithm;
  if (algorithm.lambda) ec.lambda = *algorithm.lambda;
  ec.approximator = built.approximator;
  return ec;
}

std::uint64_t run_seed(std::uint64_t seed, const std::string& env_name, std::size_t n) {
  return derive_seed(dataset_seed(seed, env_name, n), 1);
}

ResultRow score(const SweepConfig& cfg, const BuiltScenario& built, const GroundTruth& gt, const AlgorithmSpec& algo,
                std::size_t n, std::uint64_t seed, const EvaluationResult& result) {
  ResultRow row;
  row.env_id = built.name;
  row.algorithm = algo.label;
  row.n_rollouts = n;
  row.seed = seed;
  row.msve = msve(*result.value, gt);
  row.gate_rate = result.gate_rate;
  row.wall_time_ms = cfg.record_wall_time ? result.wall_time_ms : 0.0;
  return row;
}

void export_maps(const std::filesystem::path& dir, const SweepConfig& cfg, std::size_t env_index,
                 const BuiltScenario& built, const GroundTruth& gt, std::size_t n, std::uint64_t seed,
                 const EvaluationResult& adaptive, const ValueApproximator* td0) {
  const EvaluatorConfig& ec = cfg.envs[env_index].evaluator;
  const ConfidenceFunction cf = ec.quantile ? ConfidenceFunction::with_quantile(adaptive.ensemble, *ec.quantile)
                                            : ConfidenceFunction::at_level(adaptive.ensemble, ec.alpha);
  const std::filesystem::path maps = dir / "violation_maps";
  std::filesystem::create_directories(maps);
  const std::string stem = file_stem(built.name) + "_n" + std::to_string(n) + "_seed" + std::to_string(seed);
  {
    std::ofstream out(maps / (stem + "_truth.csv"));
    write_violation_map(out, violation_map(cf, gt.eval, gt.values));
  }
  if (td0 != nullptr) {
    std::vector<double> ref(gt.size());
    for (std::size_t i = 0; i < gt.size(); ++i) ref[i] = td0->predict(gt.eval.states[i]);
    std::ofstream out(maps / (stem + "_td.csv"));
    write_violation_map(out, violation_map(cf, gt.eval, ref));
  }
}

struct Stats {
  double mean = 0.0;
  double stderr_ = 0.0;
  double gate = 0.0;
  std::size_t count = 0;
};

}  // namespace

AlgorithmSpec parse_algorithm_spec(std::string_view text) {
  AlgorithmSpec a;
  a.label = std::string(text);
  const std::size_t colon = text.find(':');
  a.algorithm = parse_algorithm(text.substr(0, colon));
  if (colon != std::string_view::npos) {
    if (a.algorithm != Algorithm::td_lambda) throw std::invalid_argument("only td_lambda takes a parameter: " + a.label);
    const double lambda = detail::parse_double(text.substr(colon + 1));
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]: " + a.label);
    a.lambda = lambda;
  }
  return a;
}

void SweepConfig::validate() const {
  if (envs.empty()) throw std::invalid_argument("sweep: no environments");
  if (algorithms.empty()) throw std::invalid_argument("sweep: no algorithms");
  if (n_rollouts.empty()) throw std::invalid_argument("sweep: no rollout counts");
  if (seeds.empty()) throw std::invalid_argument("sweep: no seeds");
  if (max_steps == 0) throw std::invalid_argument("sweep: max_steps must be positive");
  for (std::size_t n : n_rollouts) {
    if (n == 0) throw std::invalid_argument("sweep: rollout counts must be positive");
  }
  std::set<std::string> labels;
  for (const AlgorithmSpec& a : algorithms) {
    if (!labels.insert(a.label).second) throw std::invalid_argument("sweep: duplicate algorithm " + a.label);
  }
  for (const SweepEnv& e : envs) {
    if (e.spec.name.find_first_of(",\n\r\"|") != std::string::npos) {
      throw std::invalid_argument("sweep: environment names may not contain , | or quotes");
    }
    e.evaluator.validate();
  }
}

SweepConfig parse_sweep_config(std::string_view json_text) {
  static const std::set<std::string> known = {
      "envs",      "algorithms",      "n_rollouts",       "seeds", "max_steps", "ground_truth",
      "threads",   "record_wall_time", "export_violation_maps"};
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument("sweep config: " + std::string(e.what()));
  }
  if (!doc.is_object()) throw std::invalid_argument("sweep config: expected an object");
  SweepConfig cfg;
  EvaluatorConfig defaults;
  try {
    json evaluator_keys = json::object();
    for (const auto& [key, value] : doc.items()) {
      if (kEvaluatorKeys.contains(key)) {
        evaluator_keys[key] = value;
      } else if (!known.contains(key)) {
        throw std::invalid_argument("sweep config: unknown key '" + key + "'");
      }
    }
    apply_evaluator_json(defaults, evaluator_keys);

    for (const json& a : doc.at("algorithms")) cfg.algorithms.push_back(parse_algorithm_spec(a.get<std::string>()));
    cfg.n_rollouts = doc.at("n_rollouts").get<std::vector<std::size_t>>();
    const json& seeds = doc.at("seeds");
    if (seeds.is_number_unsigned() || seeds.is_number_integer()) {
      const auto count = seeds.get<std::uint64_t>();
      for (std::uint64_t s = 0; s < count; ++s) cfg.seeds.push_back(s);
    } else {
      cfg.seeds = seeds.get<std::vector<std::uint64_t>>();
    }
    cfg.max_steps = doc.value("max_steps", cfg.max_steps);
    cfg.threads = doc.value("threads", cfg.threads);
    cfg.record_wall_time = doc.value("record_wall_time", cfg.record_wall_time);
    cfg.export_violation_maps = doc.value("export_violation_maps", cfg.export_violation_maps);
    if (doc.contains("ground_truth")) {
      const json& g = doc.at("ground_truth");
      for (const auto& [key, value] : g.items()) {
        if (key != "episodes" && key != "seed" && key != "threads" && key != "max_steps") {
          throw std::invalid_argument("ground_truth: unknown key '" + key + "'");
        }
      }
      cfg.ground_truth.episodes = g.value("episodes", cfg.ground_truth.episodes);
      cfg.ground_truth.threads = g.value("threads", cfg.ground_truth.threads);
      cfg.ground_truth.max_steps = g.value("max_steps", cfg.max_steps);
      cfg.ground_truth_seed = g.value("seed", cfg.ground_truth_seed);
    } else {
      cfg.ground_truth.max_steps = cfg.max_steps;
    }
    for (json e : doc.at("envs")) {
      SweepEnv env;
      env.evaluator = defaults;
      if (e.contains("evaluator")) {
        apply_evaluator_json(env.evaluator, e.at("evaluator"));
        e.erase("evaluator");
      }
      if (e.contains("ground_truth_file")) {
        env.ground_truth_file = e.at("ground_truth_file").get<std::string>();
        e.erase("ground_truth_file");
      }
      env.spec = detail::env_spec_from_json(e);
      cfg.envs.push_back(std::move(env));
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument("sweep config: " + std::string(e.what()));
  }
  cfg.validate();
  return cfg;
}

SweepConfig load_sweep_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_sweep_config(text);
}

std::string sweep_config_to_json(const SweepConfig& cfg) {
  json envs = json::array();
  for (const SweepEnv& e : cfg.envs) {
    json j = detail::env_spec_json(e.spec);
    j["evaluator"] = evaluator_json(e.evaluator);
    if (!e.ground_truth_file.empty()) j["ground_truth_file"] = e.ground_truth_file;
    envs.push_back(j);
  }
  json algorithms = json::array();
  for (const AlgorithmSpec& a : cfg.algorithms) algorithms.push_back(a.label);
  const json doc = {{"envs", envs},
                    {"algorithms", algorithms},
                    {"n_rollouts", cfg.n_rollouts},
                    {"seeds", cfg.seeds},
                    {"max_steps", cfg.max_steps},
                    {"ground_truth",
                     {{"episodes", cfg.ground_truth.episodes},
                      {"seed", cfg.ground_truth_seed},
                      {"threads", cfg.ground_truth.threads},
                      {"max_steps", cfg.ground_truth.max_steps}}},
                    {"threads", cfg.threads},
                    {"record_wall_time", cfg.record_wall_time},
                    {"export_violation_maps", cfg.export_violation_maps}};
  return doc.dump(2);
}

std::uint64_t dataset_seed(std::uint64_t seed, const std::string& env_name, std::size_t n) {
  return derive_seed(seed, stable_hash(env_name), n);
}

GroundTruth sweep_ground_truth(const SweepConfig& cfg, std::size_t env_index, const BuiltScenario& built) {
  const SweepEnv& e = cfg.envs.at(env_index);
  if (!e.ground_truth_file.empty()) {
    GroundTruth gt = load_ground_truth(e.ground_truth_file);
    if (gt.size() == 0) throw std::runtime_error("ground truth file has no states: " + e.ground_truth_file);
    return gt;
  }
  const Environment& env = *built.scenario.env;
  const bool closed_form = std::all_of(built.eval.states.begin(), built.eval.states.end(),
                                       [&](const State& s) { return env.true_value(s).has_value(); });
  if (closed_form) return analytic_ground_truth(env, built.eval);
  return estimate_ground_truth(env, *built.scenario.policy, built.eval, cfg.ground_truth,
                               derive_seed(cfg.ground_truth_seed, stable_hash(built.name)));
}

ResultRow run_cell(const SweepConfig& cfg, std::size_t env_index, const AlgorithmSpec& algorithm, std::size_t n,
                   std::uint64_t seed, const BuiltScenario& built, const GroundTruth& gt) {
  const Environment& env = *built.scenario.env;
  const Dataset data =
      collect_trajectories(env, *built.scenario.policy, n, cfg.max_steps, dataset_seed(seed, built.name, n));
  const EvaluatorConfig ec = cell_config(cfg, env_index, algorithm, built);
  const EvaluationResult result = evaluate(data, env.discount(), ec, run_seed(seed, built.name, n));
  return score(cfg, built, gt, algorithm, n, seed, result);
}

SweepOutcome run_sweep(const SweepConfig& cfg, const std::filesystem::path& output_dir) {
  cfg.validate();
  std::vector<BuiltScenario> built;
  std::set<std::string> names;
  for (const SweepEnv& e : cfg.envs) {
    built.push_back(build_scenario(e.spec));
    if (!names.insert(built.back().name).second) {
      throw std::invalid_argument("sweep: duplicate environment name " + built.back().name);
    }
  }
  // A missing ground truth fails every cell of its environment, not the sweep.
  std::vector<std::optional<GroundTruth>> truth(built.size());
  std::vector<std::string> truth_error(built.size());
  for (std::size_t e = 0; e < built.size(); ++e) {
    try {
      truth[e] = sweep_ground_truth(cfg, e, built[e]);
    } catch (const std::exception& ex) {
      truth_error[e] = std::string("ground truth: ") + ex.what();
    }
  }

  std::vector<Cell> groups;
  for (std::size_t e = 0; e < cfg.envs.size(); ++e) {
    for (std::size_t n : cfg.n_rollouts) {
      for (std::uint64_t s : cfg.seeds) groups.push_back({e, n, s});
    }
  }
  const std::size_t per_group = cfg.algorithms.size();

  std::map<std::string, ResultRow> done;
  const bool to_disk = !output_dir.empty();
  const std::filesystem::path results_path = output_dir / "results.csv";
  if (to_disk) {
    std::filesystem::create_directories(output_dir);
    if (std::filesystem::exists(results_path)) {
      for (ResultRow& r : read_results_csv(results_path)) done[r.key()] = std::move(r);
    }
    std::ofstream(output_dir / "config.json") << sweep_config_to_json(cfg) << '\n';
  }

  std::ofstream journal;
  if (to_disk) {
    journal.open(results_path, std::ios::trunc);
    write_results_csv(journal, {});
    for (const auto& [key, row] : done) journal << format_result_row(row) << '\n';
    journal.flush();
  }

  std::vector<std::optional<ResultRow>> slots(groups.size() * per_group);
  SweepOutcome outcome;
  std::mutex writer;
  std::atomic<std::size_t> reused{0};

  detail::parallel_for(groups.size(), cfg.threads, [&](std::size_t g) {
    const Cell& cell = groups[g];
    const BuiltScenario& b = built[cell.env];
    const std::optional<GroundTruth>& gt = truth[cell.env];
    std::optional<Dataset> data;
    std::unique_ptr<ValueApproximator> td0_value;
    std::optional<EvaluationResult> adaptive;
    for (std::size_t a = 0; a < per_group; ++a) {
      const AlgorithmSpec& algo = cfg.algorithms[a];
      ResultRow probe;
      probe.env_id = b.name;
      probe.algorithm = algo.label;
      probe.n_rollouts = cell.n;
      probe.seed = cell.seed;
      const std::string key = probe.key();
      if (auto it = done.find(key); it != done.end()) {
        slots[g * per_group + a] = it->second;
        ++reused;
        continue;
      }
      try {
        if (!gt) throw std::runtime_error(truth_error[cell.env]);
        const Environment& env = *b.scenario.env;
        if (!data) {
          data = collect_trajectories(env, *b.scenario.policy, cell.n, cfg.max_steps,
                                      dataset_seed(cell.seed, b.name, cell.n));
        }
        const EvaluatorConfig ec = cell_config(cfg, cell.env, algo, b);
        EvaluationResult result = evaluate(*data, env.discount(), ec, run_seed(cell.seed, b.name, cell.n));
        const ResultRow row = score(cfg, b, *gt, algo, cell.n, cell.seed, result);
        slots[g * per_group + a] = row;
        if (algo.algorithm == Algorithm::td0 && !td0_value) td0_value = std::move(result.value);
        if (algo.algorithm == Algorithm::adaptive_td && !adaptive) adaptive = std::move(result);
        if (to_disk) {
          std::lock_guard lock(writer);
          journal << format_result_row(row) << '\n';
          journal.flush();
        }
      } catch (const std::exception& ex) {
        std::lock_guard lock(writer);
        outcome.failures.push_back({key, ex.what()});
      }
    }
    if (to_disk && cfg.export_violation_maps && adaptive) {
      try {
        export_maps(output_dir, cfg, cell.env, b, *gt, cell.n, cell.seed, *adaptive, td0_value.get());
      } catch (const std::exception& ex) {
        std::lock_guard lock(writer);
        outcome.failures.push_back({b.name + "|violation_map|" + std::to_string(cell.n) + "|" +
                                        std::to_string(cell.seed),
                                    ex.what()});
      }
    }
  });
  journal.close();

  for (auto& s : slots) {
    if (s) outcome.rows.push_back(std::move(*s));
  }
  outcome.reused = reused.load();
  std::sort(outcome.failures.begin(), outcome.failures.end(),
            [](const CellFailure& a, const CellFailure& b) { return a.key < b.key; });

  if (to_disk) {
    {
      std::ofstream out(results_path, std::ios::trunc);
      write_results_csv(out, outcome.rows);
    }
    const std::filesystem::path failures_path = output_dir / "failures.csv";
    if (outcome.failures.empty()) {
      std::filesystem::remove(failures_path);
    } else {
      std::ofstream out(failures_path, std::ios::trunc);
      out << "cell,error\n";
      for (const CellFailure& f : outcome.failures) out << detail::csv_safe(f.key) << ',' << detail::csv_safe(f.error) << '\n';
    }
    if (!outcome.rows.empty()) write_reports(output_dir, outcome.rows);
  }
  return outcome;
}

void write_reports(const std::filesystem::path& dir, const std::vector<ResultRow>& rows) {
  using detail::format_double;
  std::filesystem::create_directories(dir);
  // (env, n) -> algorithm -> stats, keeping first-seen order of envs and algorithms.
  std::vector<std::string> env_order;
  std::vector<std::string> algo_order;
  std::map<std::tuple<std::string, std::size_t, std::string>, std::vector<const ResultRow*>> cells;
  for (const ResultRow& r : rows) {
    if (std::find(env_order.begin(), env_order.end(), r.env_id) == env_order.end()) env_order.push_back(r.env_id);
    if (std::find(algo_order.begin(), algo_order.end(), r.algorithm) == algo_order.end()) {
      algo_order.push_back(r.algorithm);
    }
    cells[{r.env_id, r.n_rollouts, r.algorithm}].push_back(&r);
  }
  std::set<std::size_t> ns;
  for (const ResultRow& r : rows) ns.insert(r.n_rollouts);

  std::map<std::tuple<std::string, std::size_t, std::string>, Stats> stats;
  for (const auto& [key, list] : cells) {
    Stats s;
    s.count = list.size();
    for (const ResultRow* r : list) {
      s.mean += r->msve;
      s.gate += r->gate_rate;
    }
    s.mean /= static_cast<double>(s.count);
    s.gate /= static_cast<double>(s.count);
    if (s.count > 1) {
      double ss = 0.0;
      for (const ResultRow* r : list) ss += (r->msve - s.mean) * (r->msve - s.mean);
      s.stderr_ = std::sqrt(ss / static_cast<double>(s.count - 1) / static_cast<double>(s.count));
    }
    stats[key] = s;
  }

  std::ofstream summary(dir / "summary.csv", std::ios::trunc);
  summary << "env_id,algorithm,n_rollouts,seeds,msve_mean,msve_stderr,msve_ci_low,msve_ci_high,gate_rate_mean\n";
  std::ofstream by_max(dir / "normalized_max.csv", std::ios::trunc);
  by_max << "env_id,n_rollouts,algorithm,relative_msve\n";
  std::ofstream minmax(dir / "normalized_minmax.csv", std::ios::trunc);
  minmax << "env_id,n_rollouts,algorithm,relative_msve,tied\n";

  std::map<std::size_t, std::vector<Scores>> per_n;
  for (const std::string& env : env_order) {
    for (std::size_t n : ns) {
      Scores scores;
      for (const std::string& algo : algo_order) {
        auto it = stats.find({env, n, algo});
        if (it == stats.end()) continue;
        const Stats& s = it->second;
        summary << env << ',' << algo << ',' << n << ',' << s.count << ',' << format_double(s.mean) << ','
                << format_double(s.stderr_) << ',' << format_double(s.mean - 1.96 * s.stderr_) << ','
                << format_double(s.mean + 1.96 * s.stderr_) << ',' << format_double(s.gate) << '\n';
        scores[algo] = s.mean;
      }
      if (scores.empty()) continue;
      Scores rel;
      try {
        rel = normalize_by_max(scores);
      } catch (const std::invalid_argument&) {
        for (const auto& [algo, v] : scores) rel[algo] = std::numeric_limits<double>::quiet_NaN();
      }
      const MinMaxScores mm = normalize_minmax(scores);
      for (const std::string& algo : algo_order) {
        if (!scores.contains(algo)) continue;
        by_max << env << ',' << n << ',' << algo << ',' << format_double(rel[algo]) << '\n';
        minmax << env << ',' << n << ',' << algo << ',' << format_double(mm.values.at(algo)) << ','
               << (mm.tied ? "true" : "false") << '\n';
      }
      per_n[n].push_back(mm.values);
    }
  }

  std::ofstream average(dir / "normalized_minmax_average.csv", std::ios::trunc);
  average << "n_rollouts,algorithm,relative_msve,scenarios\n";
  for (const auto& [n, list] : per_n) {
    Scores avg;
    try {
      avg = average_scores(list);
    } catch (const std::invalid_argument&) {
      continue;
    }
    for (const std::string& algo : algo_order) {
      if (!avg.contains(algo)) continue;
      average << n << ',' << algo << ',' << format_double(avg[algo]) << ',' << list.size() << '\n';
    }
  }
}

}  // namespace adaptd
