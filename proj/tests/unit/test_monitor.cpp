#include <doctest.h>

#include <random>

#include "sadeepdecs/monitor.hpp"

using namespace sadeepdecs;

namespace {

Observation obs(std::uint64_t step, int prediction, int truth) {
  Observation o;
  o.x[0] = static_cast<double>(step);
  o.prediction = prediction;
  o.truth = truth;
  o.step = step;
  return o;
}

// Window of `n` observations with the given accuracy.
SlidingWindow window_with(std::size_t n, double acc) {
  SlidingWindow w(n);
  const auto correct = static_cast<std::size_t>(acc * static_cast<double>(n) + 0.5);
  for (std::size_t i = 0; i < n; ++i) w.push(obs(i, 0, i < correct ? 0 : 1));
  return w;
}

RunningStats stats_with(double safety, double time) {
  RunningStats s;
  const int n = 100;
  const int collisions = static_cast<int>((1.0 - safety) * n + 0.5);
  for (int i = 0; i < n; ++i) s.record(i < collisions, time);
  return s;
}

}  // namespace

TEST_SUITE("monitor") {

TEST_CASE("window keeps the latest observations") {
  SlidingWindow w(3);
  for (std::uint64_t i = 0; i < 4; ++i) w.push(obs(i, 0, 0));
  REQUIRE(w.size() == 3);
  CHECK(w.items().front().step == 1);
  CHECK(w.items().back().step == 3);
}

TEST_CASE("window contract") {
  SlidingWindow w(3);
  CHECK_THROWS_AS(w.accuracy(), MonitorError);
  w.push(obs(5, 0, 0));
  CHECK_THROWS_AS(w.push(obs(5, 0, 0)), MonitorError);
  CHECK_THROWS_AS(w.push(obs(4, 0, 0)), MonitorError);
  CHECK_THROWS(SlidingWindow(0));
}

TEST_CASE("property: incremental accuracy equals recomputation") {
  std::mt19937_64 rng(4);
  SlidingWindow w(37);
  for (std::uint64_t i = 0; i < 2000; ++i) {
    w.push(obs(i, static_cast<int>(rng() % 2), static_cast<int>(rng() % 2)));
    std::size_t correct = 0;
    for (const auto& o : w.items()) correct += o.prediction == o.truth ? 1 : 0;
    const double batch = static_cast<double>(correct) / static_cast<double>(w.size());
    CHECK(w.running_accuracy() == doctest::Approx(batch).epsilon(1e-12));
    CHECK(w.accuracy() == doctest::Approx(batch).epsilon(1e-12));
  }
}

TEST_CASE("repair rule") {
  const MonitorConfig cfg;
  auto d = should_repair(window_with(1000, 0.95), stats_with(0.93, 12), cfg);
  CHECK(d.evaluated);
  CHECK_FALSE(d.repair);

  d = should_repair(window_with(1000, 0.85), stats_with(0.93, 12), cfg);
  CHECK(d.repair);
  CHECK(d.reasons == static_cast<unsigned>(RepairReason::Accuracy));

  d = should_repair(window_with(1000, 0.95), stats_with(0.88, 12), cfg);
  CHECK(d.repair);
  CHECK(d.reasons == static_cast<unsigned>(RepairReason::Safety));

  d = should_repair(window_with(1000, 0.95), stats_with(0.93, 16), cfg);
  CHECK(d.reasons == static_cast<unsigned>(RepairReason::Time));

  d = should_repair(window_with(999, 0.10), stats_with(0.5, 16), cfg);
  CHECK_FALSE(d.evaluated);
  CHECK_FALSE(d.repair);
}

TEST_CASE("running statistics") {
  RunningStats s;
  CHECK(s.safety_rate() == 1.0);
  CHECK(s.mean_time() == 0.0);
  s.record(false, 10);
  s.record(true, 14);
  CHECK(s.safety_rate() == 0.5);
  CHECK(s.mean_time() == 12.0);
}

TEST_CASE("counterexamples of a period") {
  MonitorConfig cfg;
  Monitor m(cfg);
  for (std::uint64_t i = 0; i < 1250; ++i) m.observe(obs(i, 0, i % 25 == 0 ? 1 : 0));
  CHECK(m.at_period_boundary());
  CHECK(m.completed_periods() == 1);
  const Dataset ce = m.drain_counterexamples(0);
  CHECK(ce.size() == 50);
  for (const auto& s : ce.samples) CHECK(s.y == 1);
  CHECK_THROWS_AS(m.drain_counterexamples(0), MonitorError);
  CHECK_THROWS_AS(m.drain_counterexamples(1), MonitorError);

  for (std::uint64_t i = 1250; i < 2500; ++i) m.observe(obs(i, 1, 1));
  CHECK(m.drain_counterexamples(1).empty());
}

TEST_CASE("100 errors in a period") {
  Monitor m(MonitorConfig{});
  for (std::uint64_t i = 0; i < 1250; ++i) m.observe(obs(i, i < 100 ? 1 : 0, 0));
  const Dataset ce = m.drain_counterexamples(0);
  CHECK(ce.size() == 100);
  CHECK(ce.role == Role::Window);
}

TEST_CASE("closing a period resets its statistics") {
  Monitor m(MonitorConfig{});
  m.record_attempt(true, 12);
  CHECK(m.period_stats().collisions == 1);
  const auto d = m.close_period();
  CHECK_FALSE(d.evaluated);
  CHECK(m.period_stats().attempts == 0);
}

}
