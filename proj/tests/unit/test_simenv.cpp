#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sadeepdecs/pmc.hpp"
#include "sadeepdecs/simenv.hpp"
#include "test_support.hpp"

using namespace sadeepdecs;

namespace {

SampleSource fixed_source(std::vector<Sample> samples) {
  auto data = std::make_shared<std::vector<Sample>>(std::move(samples));
  auto next = std::make_shared<std::size_t>(0);
  return [data, next]() -> std::optional<Sample> {
    if (*next >= data->size()) return std::nullopt;
    return (*data)[(*next)++];
  };
}

DecideFn always(Action a) {
  return [a](const Features&) { return Decision{a, a == Action::Move ? 0 : 1}; };
}

}  // namespace

TEST_SUITE("simenv") {

TEST_CASE("oracle labels") {
  CHECK(ground_truth_label(Features{0, 5, -std::numbers::pi / 2, 1, 0}) == 1);
  CHECK(ground_truth_label(Features{10, 10, std::numbers::pi / 2, 2, 0}) == 0);
  const Features x{2.5, 4.0, 1.0, 0.7, 0.3};
  CHECK(ground_truth_label(x) == ground_truth_label(x));
}

TEST_CASE("oracle head-on by hand integration") {
  // robot climbs x2 at 1/s, collider descends at 1/s from x2 = 5: they meet near t = 2.5
  OracleConfig cfg;
  cfg.horizon = 2.0;
  cfg.radius = 0.95;
  CHECK(ground_truth_label(Features{0, 5, -std::numbers::pi / 2, 1, 0}, cfg) == 0);  // gap 5 - 2*2 = 1
  cfg.horizon = 2.1;
  CHECK(ground_truth_label(Features{0, 5, -std::numbers::pi / 2, 1, 0}, cfg) == 1);  // gap 0.8
}

TEST_CASE("default radius gives a positive rate near one quarter") {
  const double rate = positive_rate(OracleConfig{}, 20000, 123);
  CHECK(rate >= 0.20);
  CHECK(rate <= 0.30);
  const auto c = calibrate_radius(0.25, OracleConfig{}, 5000, 7, 1e-3);
  CHECK(std::abs(c.rate - 0.25) <= 0.01);
}

TEST_CASE("uniform draws") {
  std::mt19937_64 rng(1);
  const int n = 10000;
  Features sum{};
  for (int i = 0; i < n; ++i) {
    const Features x = uniform_input(rng);
    CHECK(in_input_space(x));
    for (std::size_t k = 0; k < kFeatureDim; ++k) sum[k] += x[k];
  }
  for (std::size_t k = 0; k < kFeatureDim; ++k) {
    const double sigma = kInputSpace[k].width() / std::sqrt(12.0 * n);
    CHECK(std::abs(sum[k] / n - kInputSpace[k].mid()) <= 3 * sigma);
  }
}

TEST_CASE("random walk") {
  const Features start{1, 2, 3, 1, 0};
  EnvGenerator still(EnvMode::RandomWalk, start, 3, WalkConfig{0.0, 0.0});
  for (int i = 0; i < 5; ++i) CHECK(still.next_input() == start);

  EnvGenerator a(EnvMode::RandomWalk, start, 3), b(EnvMode::RandomWalk, start, 3);
  for (int i = 0; i < 2000; ++i) {
    const Features x = a.next_input();
    CHECK(x == b.next_input());
    CHECK(in_input_space(x));
    CHECK(in_input_space(a.center()));
  }
  const Features s = walk_scale(0.5);
  CHECK(s[0] == doctest::Approx(0.5));
  CHECK(s[1] == doctest::Approx(0.25));
}

TEST_CASE("initial datasets") {
  const Features c0{2.2, 5.0, 1.5, 0.1, 0.0};
  const auto d = gen_initial_datasets(c0, 0.1, {4000, 1000, 2500, 1000}, 5, OracleConfig{});
  CHECK(d[0].size() == 4000);
  CHECK(d[1].size() == 1000);
  CHECK(d[2].size() == 2500);
  CHECK(d[3].size() == 1000);
  double worst = 0.0;
  for (const auto& set : d)
    for (const auto& s : set.samples) {
      for (std::size_t k = 0; k < kFeatureDim; ++k) worst = std::max(worst, std::abs(s.x[k] - c0[k]));
      CHECK(s.y == ground_truth_label(s.x));
    }
  CHECK(worst <= 0.1 + 1e-12);
  const auto again = gen_initial_datasets(c0, 0.1, {4000, 1000, 2500, 1000}, 5, OracleConfig{});
  for (std::size_t k = 0; k < 4; ++k) CHECK(again[k].samples == d[k].samples);
}

TEST_CASE("path planning") {
  GridMap m{5, 5, std::vector<bool>(25, false), {0, 0}, {4, 4}};
  const Path p = plan_path(m);
  CHECK(p.size() == 9);  // 8 moves
  CHECK(p.front() == Cell{0, 0});
  CHECK(p.back() == Cell{4, 4});

  for (int r = 0; r < 5; ++r) m.obstacles[static_cast<std::size_t>(r * 5 + 2)] = true;
  CHECK_THROWS_AS(plan_path(m), UnreachableGoal);

  std::mt19937_64 rng(6);
  for (int i = 0; i < 50; ++i) {
    const GridMap g = random_map(20, 20, 0.1, rng);
    const Path q = plan_path(g);
    for (std::size_t k = 0; k < q.size(); ++k) {
      CHECK_FALSE(g.blocked(q[k]));
      if (k) CHECK(std::abs(q[k].row - q[k - 1].row) + std::abs(q[k].col - q[k - 1].col) == 1);
    }
  }
}

TEST_CASE("world steps") {
  WorldConfig quiet;
  quiet.constants.p_collider = 0.0;
  World w(quiet, 1);
  auto rec = w.step(fixed_source({}), always(Action::Move));
  CHECK(rec.outcome == StepOutcome::Done);
  CHECK(rec.elapsed == 10.0);
  CHECK(rec.queries.empty());

  WorldConfig busy;
  busy.constants.p_collider = 1.0;
  World b(busy, 1);
  int calls = 0;
  const DecideFn wait_once = [&](const Features&) {
    return ++calls == 1 ? Decision{Action::Wait, 1} : Decision{Action::Move, 0};
  };
  rec = b.step(fixed_source({Sample{{}, 1}, Sample{{}, 0}}), wait_once);
  CHECK(rec.outcome == StepOutcome::Done);
  CHECK(rec.waits == 1);
  CHECK(rec.elapsed == 12.0);

  rec = b.step(fixed_source({Sample{{}, 1}}), always(Action::Move));
  CHECK(rec.outcome == StepOutcome::Collision);
  CHECK(b.collisions() == 1);

  rec = b.step(fixed_source({}), always(Action::Move));
  CHECK(rec.outcome == StepOutcome::Incomplete);
}

TEST_CASE("property: elapsed time is waits times t_wait plus one move") {
  std::mt19937_64 rng(31);
  World w(WorldConfig{}, 2);
  std::vector<Sample> trace;
  for (int i = 0; i < 5000; ++i) trace.push_back(Sample{{}, static_cast<int>(rng() % 4 == 0)});
  const SampleSource src = fixed_source(trace);
  const DecideFn coin = [&](const Features&) {
    return Decision{rng() % 3 == 0 ? Action::Move : Action::Wait, 0};
  };
  for (int i = 0; i < 1000; ++i) {
    const auto rec = w.step(src, coin);
    if (rec.outcome == StepOutcome::Incomplete) break;
    CHECK(rec.elapsed == doctest::Approx(rec.waits * 2.0 + 10.0));
  }
}

TEST_CASE("simulated steps reproduce the chain's safety") {
  const ModelConstants k;
  const UncertaintyVector u(2000.0 / 2290, 290.0 / 2290, 10.0 / 210, 200.0 / 210);
  const double c1 = 0.6, c2 = 0.1;
  Valuation v = u.as_valuation();
  v["c1"] = c1;
  v["c2"] = c2;
  const double exact = until_probability(instantiate(reference_model(k), reference_valuation(k, v)),
                                         "collision", "done");

  std::mt19937_64 rng(77);
  std::bernoulli_distribution danger(k.p_occ);
  const SampleSource source = [&]() -> std::optional<Sample> { return Sample{{}, danger(rng) ? 1 : 0}; };
  int last_truth = 0;
  const SampleSource tracking = [&]() -> std::optional<Sample> {
    auto s = source();
    last_truth = s->y;
    return s;
  };
  const DecideFn abstract = [&](const Features&) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int prediction = unit(rng) < u.rate(static_cast<std::size_t>(last_truth), 1) ? 1 : 0;
    const double move = prediction == 0 ? c1 : c2;
    return Decision{unit(rng) < move ? Action::Move : Action::Wait, prediction};
  };
  World w(WorldConfig{}, 5);
  const std::size_t n = 100000;
  std::size_t done = 0;
  for (std::size_t i = 0; i < n; ++i) done += w.step(tracking, abstract).outcome == StepOutcome::Done ? 1 : 0;
  const double estimate = static_cast<double>(done) / n;
  CHECK(std::abs(estimate - exact) <= 3 * testsupport::binomial_sigma(exact, n));
}

TEST_CASE("trace generation") {
  EnvGenerator g(EnvMode::Uniform, Features{}, 4);
  const auto t = generate_trace(g, 100, OracleConfig{});
  CHECK(t.size() == 100);
  for (const auto& s : t) CHECK(s.y == ground_truth_label(s.x));
}

}
