#include <cmath>
#include <filesystem>
#include <vector>

#include "adaptd/approximator.hpp"
#include "doctest.h"

using namespace adaptd;

TEST_CASE("tabular fit takes per-state means, unvisited states stay 0") {
  TabularApprox t(5);
  const std::vector<State> s = {State::discrete(1), State::discrete(1), State::discrete(3)};
  const std::vector<double> y = {2.0, 4.0, -1.0};
  t.fit(s, y, 0);
  CHECK(t.predict(State::discrete(1)) == 3.0);
  CHECK(t.predict(State::discrete(3)) == -1.0);
  CHECK(t.predict(State::discrete(0)) == 0.0);
  CHECK(t.visit_counts()[1] == 2);
  CHECK(t.visit_counts()[0] == 0);
  CHECK_THROWS_AS(t.predict(State::discrete(5)), std::out_of_range);
}

TEST_CASE("fit input checks") {
  TabularApprox t(3);
  const std::vector<State> s = {State::discrete(0)};
  const std::vector<double> two = {1.0, 2.0};
  const std::vector<double> inf = {INFINITY};
  CHECK_THROWS_AS(t.fit({}, {}, 0), std::invalid_argument);
  CHECK_THROWS_AS(t.fit(s, two, 0), std::invalid_argument);
  CHECK_THROWS_AS(t.fit(s, inf, 0), std::invalid_argument);
}

TEST_CASE("biased tabular ignores data at clamped states") {
  BiasedTabularApprox b(6, {{2, 7.0}});
  const std::vector<State> s = {State::discrete(2), State::discrete(4)};
  const std::vector<double> y = {-100.0, 1.0};
  b.fit(s, y, 0);
  CHECK(b.predict(State::discrete(2)) == 7.0);
  CHECK(b.predict(State::discrete(4)) == 1.0);
  CHECK(b.fresh(1)->predict(State::discrete(2)) == 7.0);
}

TEST_CASE("grid cells partition the box") {
  GridApprox g({0, 400, 0, 300}, 19);
  CHECK(g.nx() == 22);
  CHECK(g.ny() == 16);
  CHECK(g.cell_count() == 22 * 16);
  CHECK(g.cell_of(State::point(0, 0)) == 0);
  CHECK(g.cell_of(State::point(18.99, 0)) == 0);
  CHECK(g.cell_of(State::point(19, 0)) == 1);
  CHECK(g.cell_of(State::point(0, 19)) == 22);
  CHECK(g.cell_of(State::point(400, 300)) == 22 * 16 - 1);
  CHECK(g.cell_of(State::point(-5, -5)) == 0);
  CHECK(g.cell_of(State::point(1e9, 1e9)) == 22 * 16 - 1);

  const std::vector<State> s = {State::point(1, 1), State::point(10, 10), State::point(30, 1)};
  const std::vector<double> y = {1.0, 3.0, 5.0};
  g.fit(s, y, 0);
  CHECK(g.predict(State::point(5, 5)) == 2.0);
  CHECK(g.predict(State::point(25, 5)) == 5.0);
  CHECK(g.predict(State::point(200, 200)) == 0.0);
}

TEST_CASE("clones are independent, fresh instances start blank") {
  TabularApprox t(3);
  const std::vector<State> s = {State::discrete(0)};
  const std::vector<double> y = {4.0};
  t.fit(s, y, 0);
  auto c = t.clone();
  auto f = t.fresh(9);
  const std::vector<double> y2 = {8.0};
  t.fit(s, y2, 0);
  CHECK(c->predict(State::discrete(0)) == 4.0);
  CHECK(f->predict(State::discrete(0)) == 0.0);
}

TEST_CASE("kind names round trip") {
  for (auto k : {ApproximatorKind::tabular, ApproximatorKind::biased_tabular, ApproximatorKind::grid,
                 ApproximatorKind::mlp}) {
    CHECK(parse_approximator_kind(to_string(k)) == k);
  }
  CHECK_THROWS(parse_approximator_kind("linear"));
}

TEST_CASE("checkpoints restore predictions exactly") {
  ApproximatorSpec grid;
  grid.kind = ApproximatorKind::grid;
  grid.box = {0, 100, 0, 50};
  grid.cell_size = 7;
  ApproximatorSpec biased;
  biased.kind = ApproximatorKind::biased_tabular;
  biased.state_count = 8;
  biased.clamps = {{3, 1.5}};
  ApproximatorSpec mlp;
  mlp.kind = ApproximatorKind::mlp;
  mlp.mlp.batch_size = 4;
  mlp.mlp.input_box = {0, 100, 0, 50};
  mlp.mlp.output_scale = 3.0;

  for (const ApproximatorSpec* spec : {&grid, &biased, &mlp}) {
    auto a = make_approximator(*spec, 17);
    std::vector<State> s;
    std::vector<double> y;
    for (int i = 0; i < 8; ++i) {
      s.push_back(spec->kind == ApproximatorKind::biased_tabular ? State::discrete(i) : State::point(11.0 * i, 5.0 * i));
      y.push_back(0.5 * i - 1.0);
    }
    a->fit(s, y, 20);
    const auto back = load_approximator(a->checkpoint_json());
    CHECK(back->kind() == a->kind());
    for (const State& st : s) CHECK(back->predict(st) == a->predict(st));
    if (spec->kind == ApproximatorKind::mlp) {
      // Optimiser state comes back too: one more identical step stays identical.
      a->train_batch(std::span(s).first(4), std::span(y).first(4));
      back->train_batch(std::span(s).first(4), std::span(y).first(4));
      for (const State& st : s) CHECK(back->predict(st) == a->predict(st));
    }
  }

  const auto path = std::filesystem::temp_directory_path() / "adaptd_ckpt_test.json";
  auto a = make_approximator(grid, 1);
  save_approximator(path, *a);
  CHECK(load_approximator_file(path)->checkpoint_json() == a->checkpoint_json());
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_approximator("{\"format\":\"nope\"}"), std::runtime_error);
  CHECK_THROWS(load_approximator("not json"));
}
