#include <benchmark/benchmark.h>

#include <vector>

#include "adaptd/adaptive.hpp"
#include "adaptd/confidence.hpp"
#include "adaptd/envs.hpp"
#include "adaptd/mlp.hpp"

using namespace adaptd;

static void BM_LabyrinthStep(benchmark::State& state) {
  const LabyrinthEnv env(builtin_lab_map(static_cast<int>(state.range(0))), 5.0, "bench");
  Rng rng = make_rng(1);
  State s = env.initial_state(rng);
  for (auto _ : state) {
    const StepResult r = env.step(s, static_cast<int>(uniform_index(rng, kAngleBins)), rng);
    s = r.next;
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_LabyrinthStep)->Arg(0)->Arg(5);

static void BM_MlpTrainStep(benchmark::State& state) {
  MlpConfig c;
  c.batch_size = static_cast<std::size_t>(state.range(0));
  MlpApprox net(c, 1);
  Rng rng = make_rng(2);
  std::vector<State> s(c.batch_size);
  std::vector<double> y(c.batch_size);
  for (std::size_t i = 0; i < c.batch_size; ++i) {
    s[i] = State::point(2 * uniform01(rng) - 1, 2 * uniform01(rng) - 1);
    y[i] = standard_normal(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(net.train_batch(s, y));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.batch_size));
}
BENCHMARK(BM_MlpTrainStep)->Arg(64)->Arg(512);

static void BM_TdGridSweeps(benchmark::State& state) {
  const Scenario sc = make_labyrinth_scenario(builtin_lab_map(2));
  const Dataset d = collect_trajectories(*sc.env, *sc.policy, static_cast<std::size_t>(state.range(0)), 50000, 3);
  EvaluatorConfig c;
  c.algorithm = Algorithm::td0;
  c.approximator.kind = ApproximatorKind::grid;
  c.approximator.box = sc.env->state_space().box;
  c.epochs = 100;
  c.tolerance = 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(run_baseline(d, 1.0, c, 0).value);
  state.counters["transitions"] = static_cast<double>(d.transition_count());
}
BENCHMARK(BM_TdGridSweeps)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_StudentTCdf(benchmark::State& state) {
  double t = 0.1;
  for (auto _ : state) {
    t = t > 10.0 ? 0.1 : t + 1e-3;
    benchmark::DoNotOptimize(student_t_central_probability(2.0, t));
  }
}
BENCHMARK(BM_StudentTCdf);

static void BM_TQuantileMemoised(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(t_quantile(2.0, 0.95));
}
BENCHMARK(BM_TQuantileMemoised);

BENCHMARK_MAIN();
