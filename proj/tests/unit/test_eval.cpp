#include <cmath>
#include <filesystem>
#include <memory>
#include <sstream>
#include <vector>

#include "adaptd/envs.hpp"
#include "adaptd/eval.hpp"
#include "doctest.h"

using namespace adaptd;

TEST_CASE("lattice over map 2 keeps every centre; walls drop centres elsewhere") {
  const LabyrinthEnv open(builtin_lab_map(2), 5.0, "m2");
  const EvalStates a = lattice_states(open, {});
  CHECK(a.size() == 1200);
  CHECK(a.states[0].x() == 5.0);
  CHECK(a.states[0].y() == 5.0);
  CHECK(a.cells[41] == std::array<int, 2>{1, 1});

  const LabyrinthEnv maze(builtin_lab_map(1), 5.0, "m1");
  const EvalStates b = lattice_states(maze, {40, 30});
  // Column x = 195 is clear; x in [196, 203] holds no centre either, so nothing is dropped.
  CHECK(b.size() == 1200);
  const EvalStates c = lattice_states(maze, {400, 30});
  for (const State& s : c.states) CHECK_FALSE(maze.map().in_wall(s.x(), s.y()));
  CHECK(c.size() < 12000);
  CHECK_THROWS(lattice_states(maze, {0, 3}));

  const ChainEnv chain({4, 2, 0, 1});
  const EvalStates d = lattice_states(chain, {});
  CHECK(d.size() == 8);
}

TEST_CASE("analytic ground truth on the chain") {
  const ChainEnv chain({4, 2, 1.5, 1});
  const GroundTruth gt = analytic_ground_truth(chain, lattice_states(chain, {}));
  CHECK(gt.analytic);
  for (double v : gt.values) CHECK(v == 1.5);
  const MountainCarEnv car;
  CHECK_THROWS_AS(analytic_ground_truth(car, lattice_states(car, {2, 2})), std::invalid_argument);
}

TEST_CASE("sampled ground truth: unbiased, SE shrinks as 1/sqrt(episodes), reproducible") {
  const Scenario sc = make_chain_scenario({4, 2, 1.0, 2.0});
  const EvalStates states = lattice_states(*sc.env, {});
  GroundTruthOptions o;
  o.episodes = 100;
  const GroundTruth small = estimate_ground_truth(*sc.env, *sc.policy, states, o, 1);
  o.episodes = 400;
  o.threads = 3;
  const GroundTruth big = estimate_ground_truth(*sc.env, *sc.policy, states, o, 1);
  double ratio = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    ratio += big.std_errors[i] / small.std_errors[i];
    CHECK(std::abs(big.values[i] - 1.0) < 5 * big.std_errors[i]);
    CHECK(small.std_errors[i] == doctest::Approx(2.0 / 10.0).epsilon(0.25));
  }
  CHECK(ratio / static_cast<double>(states.size()) == doctest::Approx(0.5).epsilon(0.2));
  o.threads = 1;
  const GroundTruth again = estimate_ground_truth(*sc.env, *sc.policy, states, o, 1);
  CHECK(again.values == big.values);
  o.episodes = 0;
  CHECK_THROWS_AS(estimate_ground_truth(*sc.env, *sc.policy, states, o, 1), std::invalid_argument);
}

TEST_CASE("locked chamber has zero true value") {
  const Scenario sc = make_labyrinth_scenario(builtin_lab_map(3));
  EvalStates inside;
  inside.states = {State::point(95, 225), State::point(60, 190)};
  inside.cells = {{0, 0}, {1, 0}};
  GroundTruthOptions o;
  o.episodes = 2;
  o.max_steps = 3000;
  const GroundTruth gt = estimate_ground_truth(*sc.env, *sc.policy, inside, o, 3);
  for (double v : gt.values) CHECK(v == 0.0);
}

TEST_CASE("ground truth files round trip") {
  const Scenario sc = make_mountain_car_scenario();
  GroundTruthOptions o;
  o.episodes = 2;
  const GroundTruth gt = estimate_ground_truth(*sc.env, *sc.policy, lattice_states(*sc.env, {3, 2}), o, 5);
  const auto path = std::filesystem::temp_directory_path() / "adaptd_gt_test.json";
  save_ground_truth(path, gt);
  const GroundTruth back = load_ground_truth(path);
  std::filesystem::remove(path);
  CHECK(back.env_id == gt.env_id);
  CHECK(back.values == gt.values);
  CHECK(back.std_errors == gt.std_errors);
  CHECK(back.eval.cells == gt.eval.cells);
  for (std::size_t i = 0; i < gt.size(); ++i) CHECK(back.eval.states[i] == gt.eval.states[i]);
}

namespace {

GroundTruth table_truth(std::vector<double> values) {
  GroundTruth gt;
  for (std::size_t i = 0; i < values.size(); ++i) {
    gt.eval.states.push_back(State::discrete(static_cast<std::int64_t>(i)));
    gt.eval.cells.push_back({static_cast<int>(i), 0});
  }
  gt.values = std::move(values);
  return gt;
}

}  // namespace

TEST_CASE("MSVE with and without weights, visit split") {
  TabularApprox v(3);
  const std::vector<State> s = {State::discrete(0), State::discrete(1)};
  const std::vector<double> y = {1.0, 2.0};
  v.fit(s, y, 0);
  const GroundTruth gt = table_truth({0.0, 0.0, 3.0});
  CHECK(msve(v, gt) == doctest::Approx((1.0 + 4.0 + 9.0) / 3));
  const std::vector<double> w = {1.0, 0.0, 1.0};
  CHECK(msve(v, gt, w) == doctest::Approx(5.0));
  CHECK_THROWS_AS(msve(v, gt, std::vector<double>{1.0}), std::invalid_argument);
  CHECK_THROWS_AS(msve(v, gt, std::vector<double>{0.0, 0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(msve(v, gt, std::vector<double>{-1.0, 1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(msve(v, GroundTruth{}), std::invalid_argument);

  const VisitSplit split = msve_by_visits(v, gt);
  CHECK(split.visited == 2);
  CHECK(split.unvisited == 1);
  CHECK(split.visited_msve == doctest::Approx(2.5));
  CHECK(split.unvisited_msve == doctest::Approx(9.0));
}

TEST_CASE("score normalisation") {
  const Scores s = {{"mc", 4.0}, {"td0", 1.0}, {"adaptive_td", 2.0}};
  const Scores m = normalize_by_max(s);
  CHECK(m.at("mc") == 1.0);
  CHECK(m.at("td0") == 0.25);
  const MinMaxScores mm = normalize_minmax(s);
  CHECK_FALSE(mm.tied);
  CHECK(mm.values.at("mc") == 1.0);
  CHECK(mm.values.at("td0") == 0.0);
  CHECK(mm.values.at("adaptive_td") == doctest::Approx(1.0 / 3));
  const MinMaxScores tie = normalize_minmax({{"a", 2.0}, {"b", 2.0}});
  CHECK(tie.tied);
  CHECK(tie.values.at("a") == 0.0);
  CHECK_THROWS(normalize_by_max({{"a", 0.0}}));
  CHECK_THROWS(normalize_minmax({}));

  const std::vector<Scores> many = {{{"a", 0.0}, {"b", 1.0}}, {{"a", 1.0}, {"b", 0.5}}};
  const Scores avg = average_scores(many);
  CHECK(avg.at("a") == 0.5);
  CHECK(avg.at("b") == 0.75);
  const std::vector<Scores> mismatch = {{{"a", 0.0}}, {{"b", 1.0}}};
  CHECK_THROWS(average_scores(mismatch));
}

TEST_CASE("normalised scores stay in range and preserve order") {
  Rng rng = make_rng(19);
  for (int trial = 0; trial < 200; ++trial) {
    Scores s;
    for (const char* name : {"a", "b", "c", "d"}) s[name] = std::exp(3 * standard_normal(rng));
    const Scores m = normalize_by_max(s);
    const MinMaxScores mm = normalize_minmax(s);
    for (const auto& [k, v] : s) {
      CHECK(m.at(k) > 0.0);
      CHECK(m.at(k) <= 1.0);
      CHECK(mm.values.at(k) >= 0.0);
      CHECK(mm.values.at(k) <= 1.0);
      for (const auto& [k2, v2] : s) {
        if (v < v2) CHECK(mm.values.at(k) < mm.values.at(k2));
      }
    }
  }
}

TEST_CASE("violation map labels and CSV") {
  auto e = std::make_shared<Ensemble>();
  for (double v : {1.0, 2.0, 3.0}) {
    auto t = std::make_unique<TabularApprox>(3);
    const std::vector<State> s = {State::discrete(0), State::discrete(1), State::discrete(2)};
    const std::vector<double> y = {v, v, v};
    t->fit(s, y, 0);
    e->members.push_back(std::move(t));
  }
  const ConfidenceFunction cf = ConfidenceFunction::with_quantile(e, 1.0);
  const GroundTruth gt = table_truth({0, 0, 0});
  const std::vector<double> ref = {10.0, -10.0, 2.0};
  const auto cells = violation_map(cf, gt.eval, ref);
  CHECK(cells[0].label == Violation::over);
  CHECK(cells[1].label == Violation::under);
  CHECK(cells[2].label == Violation::inside);
  std::ostringstream out;
  write_violation_map(out, cells);
  CHECK(out.str() ==
        "# over: reference > upper; under: reference < lower\ncell_x,cell_y,label\n0,0,over\n1,0,under\n2,0,inside\n");
  CHECK_THROWS(violation_map(cf, gt.eval, std::vector<double>{1.0}));
}
