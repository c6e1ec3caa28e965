// adaptd command line: collect datasets, estimate ground truth, run single
// evaluations, run and report sweeps.

#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>

#include "CLI11.hpp"
#include "adaptd/adaptive.hpp"
#include "adaptd/dataset_io.hpp"
#include "adaptd/eval.hpp"
#include "adaptd/scenario.hpp"
#include "adaptd/sweep.hpp"

namespace fs = std::filesystem;
using namespace adaptd;

namespace {

struct EnvArgs {
  std::string kind = "chain";
  std::string config_file;
  std::string approximator;
  EnvSpec spec;
  std::size_t lattice_nx = 40;
  std::size_t lattice_ny = 30;
};

void add_env_options(CLI::App* app, EnvArgs& a) {
  app->add_option("--env", a.kind, "chain, labyrinth or mountain_car")->check(
      CLI::IsMember({"chain", "labyrinth", "mountain_car"}));
  app->add_option("--env-config", a.config_file, "JSON environment object (replaces the flags below)")
      ->check(CLI::ExistingFile);
  app->add_option("--k", a.spec.chain.k, "chain: branch count");
  app->add_option("--p", a.spec.chain.p, "chain: branches routed to b1");
  app->add_option("--mu", a.spec.chain.mu, "chain: reward mean");
  app->add_option("--sigma", a.spec.chain.sigma, "chain: reward std");
  app->add_option("--clamp-beta", a.spec.clamp_beta, "chain: bias of biased_tabular at b1, b2");
  app->add_option("--map", a.spec.map_id, "labyrinth: builtin map id")->check(CLI::Range(0, 5));
  app->add_option("--map-file", a.spec.map_file, "labyrinth: map JSON file")->check(CLI::ExistingFile);
  app->add_option("--step-size", a.spec.step_size, "labyrinth: step length");
  app->add_option("--eps", a.spec.eps, "mountain car: exploration rate");
  app->add_option("--approximator", a.approximator, "tabular, biased_tabular, grid or mlp");
  app->add_option("--cell-size", a.spec.cell_size, "grid cell edge");
  app->add_option("--output-scale", a.spec.output_scale, "mlp output scale (0 = per-env default)");
  app->add_option("--lattice-nx", a.lattice_nx, "evaluation lattice columns");
  app->add_option("--lattice-ny", a.lattice_ny, "evaluation lattice rows");
}

EnvSpec resolve_env(const EnvArgs& a) {
  if (!a.config_file.empty()) {
    std::ifstream in(a.config_file);
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_env_spec(text);
  }
  EnvSpec s = a.spec;
  s.kind = parse_env_kind(a.kind);
  if (!a.approximator.empty()) s.approximator = parse_approximator_kind(a.approximator);
  s.lattice = {a.lattice_nx, a.lattice_ny};
  return s;
}

struct EvalArgs {
  std::string algorithm = "adaptive_td";
  double alpha = 0.95;
  std::string quantile;
  double lambda = 0.75;
  std::size_t members = 3;
  bool no_bootstrap = false;
  std::string fallback = "midpoint";
  std::size_t epochs = EvaluatorConfig{}.epochs;
  double tolerance = EvaluatorConfig{}.tolerance;
  std::size_t budget = EvaluatorConfig{}.budget;
  std::string refresh = "per_minibatch";
  std::size_t threads = 0;
};

void add_eval_options(CLI::App* app, EvalArgs& a) {
  app->add_option("--algorithm", a.algorithm, "mc, td0, td_lambda, mc_ensemble or adaptive_td");
  app->add_option("--alpha", a.alpha, "confidence level");
  app->add_option("--quantile", a.quantile, "explicit interval multiplier, or 'inf'");
  app->add_option("--lambda", a.lambda, "TD(lambda) mixing");
  app->add_option("--members", a.members, "ensemble size");
  app->add_flag("--no-bootstrap", a.no_bootstrap, "train ensemble members on the full dataset");
  app->add_option("--fallback", a.fallback, "midpoint or clip");
  app->add_option("--epochs", a.epochs, "sweep cap for cell approximators");
  app->add_option("--tolerance", a.tolerance, "convergence threshold for cell approximators");
  app->add_option("--budget", a.budget, "minibatches per network");
  app->add_option("--refresh", a.refresh, "per_minibatch or per_epoch");
  app->add_option("--threads", a.threads, "worker threads (0 = all cores)");
}

EvaluatorConfig resolve_eval(const EvalArgs& a, const ApproximatorSpec& approx) {
  EvaluatorConfig c;
  c.algorithm = parse_algorithm(a.algorithm);
  c.alpha = a.alpha;
  if (a.quantile == "inf") {
    c.quantile = std::numeric_limits<double>::infinity();
  } else if (!a.quantile.empty()) {
    c.quantile = std::stod(a.quantile);
  }
  c.lambda = a.lambda;
  c.members = a.members;
  c.bootstrap = !a.no_bootstrap;
  c.fallback = parse_fallback(a.fallback);
  c.epochs = a.epochs;
  c.tolerance = a.tolerance;
  c.budget = a.budget;
  c.refresh = parse_refresh(a.refresh);
  c.threads = a.threads;
  c.approximator = approx;
  c.validate();
  return c;
}

GroundTruth ground_truth_for(const BuiltScenario& b, const std::string& file, const GroundTruthOptions& opts,
                             std::uint64_t seed) {
  if (!file.empty()) return load_ground_truth(file);
  const Environment& env = *b.scenario.env;
  bool closed = true;
  for (const State& s : b.eval.states) closed = closed && env.true_value(s).has_value();
  if (closed) return analytic_ground_truth(env, b.eval);
  return estimate_ground_truth(env, *b.scenario.policy, b.eval, opts, seed);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo, TD and Adaptive TD policy evaluation benchmarks"};
  app.require_subcommand(1);

  // collect
  EnvArgs collect_env;
  std::size_t collect_n = 100;
  std::uint64_t collect_seed = 0;
  std::size_t collect_max_steps = kDefaultMaxSteps;
  std::size_t collect_threads = 0;
  std::string collect_out;
  auto* collect = app.add_subcommand("collect", "Roll out the reference policy and write a JSONL dataset");
  add_env_options(collect, collect_env);
  collect->add_option("--n", collect_n, "number of trajectories")->check(CLI::PositiveNumber);
  collect->add_option("--seed", collect_seed, "dataset seed");
  collect->add_option("--max-steps", collect_max_steps, "per-trajectory step cap")->check(CLI::PositiveNumber);
  collect->add_option("--threads", collect_threads, "worker threads (0 = all cores)");
  collect->add_option("--out", collect_out, "output file")->required();

  // ground-truth
  EnvArgs gt_env;
  GroundTruthOptions gt_opts;
  std::uint64_t gt_seed = 20240101;
  std::string gt_out;
  auto* gt_cmd = app.add_subcommand("ground-truth", "Estimate true values on the evaluation lattice");
  add_env_options(gt_cmd, gt_env);
  gt_cmd->add_option("--episodes", gt_opts.episodes, "episodes per state")->check(CLI::PositiveNumber);
  gt_cmd->add_option("--max-steps", gt_opts.max_steps, "per-episode step cap");
  gt_cmd->add_option("--threads", gt_opts.threads, "worker threads (0 = all cores)");
  gt_cmd->add_option("--seed", gt_seed, "rollout seed");
  gt_cmd->add_option("--out", gt_out, "output JSON file")->required();

  // run
  EnvArgs run_env;
  EvalArgs run_eval;
  std::size_t run_n = 100;
  std::uint64_t run_seed = 0;
  std::size_t run_max_steps = kDefaultMaxSteps;
  std::string run_dataset;
  std::string run_gt;
  GroundTruthOptions run_gt_opts;
  std::string run_out;
  auto* run = app.add_subcommand("run", "Evaluate one algorithm on one dataset and score it");
  add_env_options(run, run_env);
  add_eval_options(run, run_eval);
  run->add_option("--n", run_n, "trajectories to collect")->check(CLI::PositiveNumber);
  run->add_option("--seed", run_seed, "dataset and training seed");
  run->add_option("--max-steps", run_max_steps, "per-trajectory step cap");
  run->add_option("--dataset", run_dataset, "use a collected dataset instead")->check(CLI::ExistingFile);
  run->add_option("--ground-truth", run_gt, "ground truth JSON from the ground-truth command")
      ->check(CLI::ExistingFile);
  run->add_option("--episodes", run_gt_opts.episodes, "ground-truth episodes per state when estimating");
  run->add_option("--out-dir", run_out, "write run.json and checkpoints here");

  // sweep
  std::string sweep_config;
  std::string sweep_out;
  std::optional<std::size_t> sweep_threads;
  std::optional<std::size_t> sweep_budget;
  bool sweep_print = false;
  auto* sweep = app.add_subcommand("sweep", "Run an env x algorithm x n x seed sweep");
  sweep->add_option("--config", sweep_config, "sweep JSON document")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out-dir", sweep_out, "results directory (resumes if it holds results.csv)")->required();
  sweep->add_option("--threads", sweep_threads, "worker threads over cells (0 = all cores)");
  sweep->add_option("--budget", sweep_budget, "override the minibatch budget of every environment");
  sweep->add_flag("--print-config", sweep_print, "print the resolved configuration and exit");

  // report
  std::string report_results;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Rebuild summary and normalized tables from results.csv");
  report->add_option("--results", report_results, "results CSV")->required()->check(CLI::ExistingFile);
  report->add_option("--out-dir", report_out, "where to write the tables")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*collect) {
      const BuiltScenario b = build_scenario(resolve_env(collect_env));
      const Dataset data = collect_trajectories(*b.scenario.env, *b.scenario.policy, collect_n, collect_max_steps,
                                                collect_seed, collect_threads);
      write_dataset(fs::path(collect_out), data);
      std::printf("wrote %zu trajectories (%zu transitions) to %s\n", data.trajectories.size(),
                  data.transition_count(), collect_out.c_str());
    } else if (*gt_cmd) {
      const BuiltScenario b = build_scenario(resolve_env(gt_env));
      const GroundTruth gt = ground_truth_for(b, "", gt_opts, gt_seed);
      save_ground_truth(gt_out, gt);
      std::printf("%zu states (%s) written to %s\n", gt.size(), gt.analytic ? "analytic" : "sampled", gt_out.c_str());
    } else if (*run) {
      const BuiltScenario b = build_scenario(resolve_env(run_env));
      const Environment& env = *b.scenario.env;
      const Dataset data = run_dataset.empty()
                               ? collect_trajectories(env, *b.scenario.policy, run_n, run_max_steps, run_seed)
                               : read_dataset(fs::path(run_dataset));
      if (!run_dataset.empty() && data.env_id != env.id()) {
        std::fprintf(stderr, "warning: dataset env '%s' differs from '%s'\n", data.env_id.c_str(), env.id().c_str());
      }
      const EvaluatorConfig cfg = resolve_eval(run_eval, b.approximator);
      const EvaluationResult result = evaluate(data, env.discount(), cfg, run_seed);
      run_gt_opts.threads = cfg.threads;
      const GroundTruth gt = ground_truth_for(b, run_gt, run_gt_opts, 20240101);
      const VisitSplit split = msve_by_visits(*result.value, gt);
      std::printf("env          %s\n", b.name.c_str());
      std::printf("algorithm    %s\n", to_string(cfg.algorithm).c_str());
      std::printf("trajectories %zu (%zu transitions)\n", data.trajectories.size(), data.transition_count());
      std::printf("msve         %.6g\n", msve(*result.value, gt));
      std::printf("  visited    %.6g over %zu states\n", split.visited_msve, split.visited);
      std::printf("  unvisited  %.6g over %zu states\n", split.unvisited_msve, split.unvisited);
      std::printf("gate rate    %.4f\n", result.gate_rate);
      std::printf("epochs       %zu%s\n", result.epochs.size(), result.converged ? "" : " (not converged)");
      std::printf("wall time    %.1f ms\n", result.wall_time_ms);
      if (!run_out.empty()) {
        write_run_artifacts(run_out, cfg, result, run_seed, b.name, data.trajectories.size());
        std::printf("artifacts in %s\n", run_out.c_str());
      }
    } else if (*sweep) {
      SweepConfig cfg = load_sweep_config(sweep_config);
      if (sweep_threads) cfg.threads = *sweep_threads;
      if (sweep_budget) {
        for (SweepEnv& e : cfg.envs) e.evaluator.budget = *sweep_budget;
      }
      if (sweep_print) {
        std::cout << sweep_config_to_json(cfg) << '\n';
        return 0;
      }
      const SweepOutcome out = run_sweep(cfg, sweep_out);
      std::printf("%zu rows (%zu reused), %zu failures; results in %s\n", out.rows.size(), out.reused,
                  out.failures.size(), sweep_out.c_str());
      for (const CellFailure& f : out.failures) std::fprintf(stderr, "failed %s: %s\n", f.key.c_str(), f.error.c_str());
      return out.failures.empty() ? 0 : 2;
    } else if (*report) {
      const std::vector<ResultRow> rows = read_results_csv(fs::path(report_results));
      write_reports(report_out, rows);
      std::printf("%zu rows summarised into %s\n", rows.size(), report_out.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
