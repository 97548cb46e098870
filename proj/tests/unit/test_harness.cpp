#include <doctest.h>

#include <filesystem>

#include "sadeepdecs/harness.hpp"
#include "sadeepdecs/text_io.hpp"

using namespace sadeepdecs;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config(Method method, const fs::path& out) {
  ExperimentConfig cfg;
  cfg.method = method;
  cfg.steps = 600;
  cfg.monitor.t_monitor = 200;
  cfg.monitor.window = 150;
  cfg.initial_sizes = {400, 100, 250, 100};
  cfg.sample_sizes = {400, 100, 100, 100};
  cfg.train.epochs = 5;
  cfg.repair_latency = 30;
  cfg.out_dir = out.string();
  return cfg;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sadeepdecs_harness_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("names") {
  CHECK(method_from_string("sa") == Method::Sadeepdecs);
  CHECK(method_from_string("no") == Method::No);
  CHECK(method_from_string("random") == Method::Random);
  CHECK_THROWS(method_from_string("xx"));
  CHECK(env_from_string("rw") == EnvMode::RandomWalk);
  CHECK(to_string(EnvMode::Uniform) == "us");
}

TEST_CASE("config validation and JSON") {
  ExperimentConfig cfg;
  cfg.steps = 1000;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);  // below T_monitor for SA
  cfg.method = Method::No;
  CHECK_NOTHROW(cfg.validate());

  cfg.seed = 77;
  cfg.env = EnvMode::RandomWalk;
  cfg.c0 = {1, 2, 3, 1, 0.5};
  const ExperimentConfig back = config_from_json(config_to_json(cfg));
  CHECK(config_to_json(back) == config_to_json(cfg));
  CHECK(back.seed == 77);
  CHECK(back.env == EnvMode::RandomWalk);

  CHECK_THROWS(config_from_json(R"({"stepz": 5})"));
  CHECK_THROWS(config_from_json(R"({"method": "sa", "steps": 10})"));
  CHECK(config_from_json(R"({"steps": 20000})").steps == 20000);
}

TEST_CASE("seed plan") {
  const auto a = SeedPlan::from(1), b = SeedPlan::from(1), c = SeedPlan::from(2);
  CHECK(a.world == b.world);
  CHECK(a.trace == b.trace);
  CHECK(a.world != c.world);
  CHECK(a.world != a.trace);
}

TEST_CASE("runs are reproducible and summaries recompute from steps") {
  const fs::path d1 = scratch("sa1"), d2 = scratch("sa2"), d3 = scratch("no");
  const auto r1 = run_experiment(small_config(Method::Sadeepdecs, d1));
  run_experiment(small_config(Method::Sadeepdecs, d2));
  for (const char* f : {"metrics.csv", "series.csv", "steps.csv", "monitor_trace.csv", "events.csv",
                        "trace.csv", "run.json"}) {
    INFO(f);
    CHECK(read_file(d1 / f) == read_file(d2 / f));
  }
  CHECK(r1.metrics.periods.size() == 3);
  CHECK(r1.metrics.queries == 600);

  const auto r3 = run_experiment(small_config(Method::No, d3));
  CHECK(r3.metrics.trace_hash == r1.metrics.trace_hash);
  CHECK(r3.initial_kappa == r1.initial_kappa);
  CHECK(r3.metrics.repairs_signalled == 0);

  const Summary s = summarize({d1, d3});
  REQUIRE(s.rows.size() == 2);
  CHECK(s.rows[0].method == "sa");
  CHECK(s.rows[1].method == "no");
  CHECK(s.rows[0].safety == r1.metrics.safety);
  CHECK(s.rows[0].mean_time == r1.metrics.mean_time);
  CHECK(s.rows[1].accuracy == doctest::Approx(r3.metrics.accuracy));
  const std::string csv = s.to_csv();
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(s.to_text().find("accuracy") != std::string::npos);

  // replaying the stored trace gives the same run
  ExperimentConfig replay = small_config(Method::No, scratch("replay"));
  replay.trace_path = (d3 / "trace.csv").string();
  CHECK(run_experiment(replay).metrics.accuracy == r3.metrics.accuracy);

  for (const auto& d : {d1, d2, d3}) fs::remove_all(d);
  fs::remove_all(replay.out_dir);
}

TEST_CASE("summarize errors") {
  const fs::path empty = scratch("empty");
  fs::create_directories(empty);
  CHECK_THROWS(summarize({empty}));
  CHECK_THROWS(summarize({}));
  fs::remove_all(empty);
}

TEST_CASE("missing benchmark trace") {
  ExperimentConfig cfg = small_config(Method::No, "");
  cfg.trace_path = "/nonexistent/trace.csv";
  CHECK_THROWS(benchmark_trace(cfg));
}

}
