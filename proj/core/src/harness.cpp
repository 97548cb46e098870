#include "sadeepdecs/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "sadeepdecs/text_io.hpp"

namespace sadeepdecs {

using json = nlohmann::json;

std::string_view to_string(Method m) {
  switch (m) {
    case Method::No: return "no";
    case Method::Random: return "random";
    case Method::Sadeepdecs: return "sa";
  }
  return "?";
}

Method method_from_string(std::string_view text) {
  if (text == "no" || text == "NO") return Method::No;
  if (text == "random" || text == "RANDOM" || text == "ra") return Method::Random;
  if (text == "sa" || text == "SA" || text == "sadeepdecs" || text == "SADEEPDECS") return Method::Sadeepdecs;
  throw std::invalid_argument("unknown method '" + std::string(text) + "' (expected sa|no|random)");
}

std::string_view to_string(EnvMode e) { return e == EnvMode::Uniform ? "us" : "rw"; }

EnvMode env_from_string(std::string_view text) {
  if (text == "us" || text == "US") return EnvMode::Uniform;
  if (text == "rw" || text == "RW") return EnvMode::RandomWalk;
  throw std::invalid_argument("unknown environment '" + std::string(text) + "' (expected us|rw)");
}

ExperimentConfig::ExperimentConfig() {
  c0 = {2.2, 5.0, 1.5, 0.1, 0.0};
}

void ExperimentConfig::validate() const {
  if (steps == 0) throw std::invalid_argument("steps must be positive");
  if (method == Method::Sadeepdecs && steps < monitor.t_monitor)
    throw std::invalid_argument("SADEEPDECS runs need at least T_monitor steps");
  if (monitor.window == 0 || monitor.t_monitor == 0) throw std::invalid_argument("monitor sizes must be positive");
  if (grid_points < 2) throw std::invalid_argument("grid_points must be at least 2");
  if (!(eps0 >= 0.0)) throw std::invalid_argument("eps0 must be nonnegative");
  for (auto s : initial_sizes)
    if (s == 0) throw std::invalid_argument("initial dataset sizes must be positive");
  if (!in_input_space(c0)) throw std::invalid_argument("c0 lies outside the input space");
}

// ---------------------------------------------------------------------------
// Config (de)serialization

namespace {

json to_json_value(const ExperimentConfig& c) {
  json j;
  j["method"] = std::string(to_string(c.method));
  j["env"] = std::string(to_string(c.env));
  j["steps"] = c.steps;
  j["seed"] = c.seed;
  j["t_monitor"] = c.monitor.t_monitor;
  j["window"] = c.monitor.window;
  j["threshold_1"] = c.monitor.threshold_1;
  j["threshold_2"] = c.monitor.threshold_2;
  j["safety_bound"] = c.monitor.safety_bound;
  j["time_bound"] = c.monitor.time_bound;
  j["p_collider"] = c.constants.p_collider;
  j["p_occ"] = c.constants.p_occ;
  j["t_move"] = c.constants.t_move;
  j["t_wait"] = c.constants.t_wait;
  j["grid_points"] = c.grid_points;
  j["initial_sizes"] = c.initial_sizes;
  j["sample_sizes"] = c.sample_sizes;
  j["split_ratios"] = c.split_ratios;
  j["learning_rate"] = c.train.learning_rate;
  j["epochs"] = c.train.epochs;
  j["batch_size"] = c.train.batch_size;
  j["oracle_dt"] = c.oracle.dt;
  j["oracle_horizon"] = c.oracle.horizon;
  j["oracle_radius"] = c.oracle.radius;
  j["c0"] = c.c0;
  j["eps0"] = c.eps0;
  j["walk_step"] = c.walk.step;
  j["walk_epsilon"] = c.walk.epsilon;
  j["repair_mode"] = c.repair_mode == RepairMode::Threaded ? "threaded" : "sequential";
  j["repair_latency"] = c.repair_latency;
  j["trace_path"] = c.trace_path;
  j["out_dir"] = c.out_dir;
  return j;
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::string config_to_json(const ExperimentConfig& cfg) { return to_json_value(cfg).dump(2); }

ExperimentConfig config_from_json(const std::string& text) {
  const json j = json::parse(text);
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  ExperimentConfig c;
  const json known = to_json_value(c);
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw std::invalid_argument("unknown config key '" + key + "'");

  if (j.contains("method")) c.method = method_from_string(j.at("method").get<std::string>());
  if (j.contains("env")) c.env = env_from_string(j.at("env").get<std::string>());
  read(j, "steps", c.steps);
  read(j, "seed", c.seed);
  read(j, "t_monitor", c.monitor.t_monitor);
  read(j, "window", c.monitor.window);
  read(j, "threshold_1", c.monitor.threshold_1);
  read(j, "threshold_2", c.monitor.threshold_2);
  read(j, "safety_bound", c.monitor.safety_bound);
  read(j, "time_bound", c.monitor.time_bound);
  read(j, "p_collider", c.constants.p_collider);
  read(j, "p_occ", c.constants.p_occ);
  read(j, "t_move", c.constants.t_move);
  read(j, "t_wait", c.constants.t_wait);
  read(j, "grid_points", c.grid_points);
  read(j, "initial_sizes", c.initial_sizes);
  read(j, "sample_sizes", c.sample_sizes);
  read(j, "split_ratios", c.split_ratios);
  read(j, "learning_rate", c.train.learning_rate);
  read(j, "epochs", c.train.epochs);
  read(j, "batch_size", c.train.batch_size);
  read(j, "oracle_dt", c.oracle.dt);
  read(j, "oracle_horizon", c.oracle.horizon);
  read(j, "oracle_radius", c.oracle.radius);
  read(j, "c0", c.c0);
  read(j, "eps0", c.eps0);
  read(j, "walk_step", c.walk.step);
  read(j, "walk_epsilon", c.walk.epsilon);
  if (j.contains("repair_mode")) {
    const auto mode = j.at("repair_mode").get<std::string>();
    if (mode == "threaded") c.repair_mode = RepairMode::Threaded;
    else if (mode == "sequential") c.repair_mode = RepairMode::Sequential;
    else throw std::invalid_argument("repair_mode must be threaded or sequential");
  }
  read(j, "repair_latency", c.repair_latency);
  read(j, "trace_path", c.trace_path);
  read(j, "out_dir", c.out_dir);
  c.validate();
  return c;
}

SeedPlan SeedPlan::from(std::uint64_t master) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32)};
  std::array<std::uint64_t, 7> s{};
  std::array<std::uint32_t, 14> words{};
  seq.generate(words.begin(), words.end());
  for (std::size_t i = 0; i < s.size(); ++i)
    s[i] = (static_cast<std::uint64_t>(words[2 * i]) << 32) | words[2 * i + 1];
  return {s[0], s[1], s[2], s[3], s[4], s[5], s[6]};
}

// ---------------------------------------------------------------------------
// Initial system

namespace {

Valuation fixed_valuation(const ModelConstants& k) { return reference_valuation(k, {}); }

}  // namespace

InitialSystem build_initial_system(const ExperimentConfig& cfg) {
  cfg.validate();
  const SeedPlan seeds = SeedPlan::from(cfg.seed);
  InitialSystem init;
  init.datasets = gen_initial_datasets(cfg.c0, cfg.eps0, cfg.initial_sizes, seeds.initial_data, cfg.oracle);

  TrainConfig tc = cfg.train;
  tc.seed = seeds.initial_training;
  auto trained = train(init.datasets[0], init.datasets[1], tc);
  init.phi = std::make_shared<const MlpParams>(std::move(trained.params));
  const Predictor predict = make_predictor(init.phi);
  init.test_accuracy = accuracy(predict, init.datasets[3]);
  init.confusion = evaluate_confusion(predict, init.datasets[2]);
  init.u = quantify(init.confusion);
  init.synthesis = synthesize(init.u, reference_model(cfg.constants), fixed_valuation(cfg.constants),
                              ParamSpace::controller(cfg.grid_points),
                              SpecSet::collision_avoidance(cfg.monitor.safety_bound, cfg.monitor.time_bound));
  return init;
}

// ---------------------------------------------------------------------------
// Benchmark trace

std::string trace_to_csv(const std::vector<Sample>& trace) {
  std::ostringstream out;
  out << "x1,x2,x3,x4,x5,y\n";
  for (const auto& s : trace) {
    for (double v : s.x) out << format_double(v) << ',';
    out << s.y << '\n';
  }
  return out.str();
}

std::vector<Sample> benchmark_trace(const ExperimentConfig& cfg) {
  if (!cfg.trace_path.empty()) {
    if (!std::filesystem::exists(cfg.trace_path))
      throw std::runtime_error("benchmark trace not found: " + cfg.trace_path);
    auto data = load_dataset_csv(cfg.trace_path, Role::Window);
    if (data.size() < cfg.steps)
      throw std::runtime_error("benchmark trace has " + std::to_string(data.size()) + " entries, need " +
                               std::to_string(cfg.steps));
    data.samples.resize(cfg.steps);
    return data.samples;
  }
  EnvGenerator gen(cfg.env, cfg.c0, SeedPlan::from(cfg.seed).trace, cfg.walk);
  return generate_trace(gen, cfg.steps, cfg.oracle);
}

// ---------------------------------------------------------------------------
// Experiment loop

namespace {

struct StepRow {
  std::size_t index;
  StepOutcome outcome;
  std::size_t waits;
  double elapsed;
  std::size_t queries;
  std::size_t correct;
  std::uint64_t version;
};

struct PeriodAccumulator {
  std::size_t queries = 0, correct = 0;
  RunningStats stats;
};

std::string outcome_name(StepOutcome o) {
  switch (o) {
    case StepOutcome::Done: return "done";
    case StepOutcome::Collision: return "collision";
    case StepOutcome::Incomplete: return "incomplete";
  }
  return "?";
}

std::string kappa_text(const Candidate& c) {
  std::string out;
  for (std::size_t i = 0; i < c.values.size(); ++i) out += (i ? ";" : "") + format_double(c.values[i]);
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  return run_experiment(cfg, build_initial_system(cfg));
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const InitialSystem& initial) {
  cfg.validate();
  const SeedPlan seeds = SeedPlan::from(cfg.seed);
  const std::vector<Sample> trace = benchmark_trace(cfg);
  const std::string trace_csv = trace_to_csv(trace);

  RuntimeConfig rc;
  rc.mode = cfg.repair_mode;
  rc.repair_latency = cfg.repair_latency;
  rc.seed = seeds.repair;
  rc.repair.split_ratios = cfg.split_ratios;
  rc.repair.sample_sizes = cfg.sample_sizes;
  rc.repair.train = cfg.train;
  rc.repair.threshold_2 = cfg.monitor.threshold_2;
  rc.repair.model = reference_model(cfg.constants);
  rc.repair.fixed = fixed_valuation(cfg.constants);
  rc.repair.space = ParamSpace::controller(cfg.grid_points);
  rc.repair.specs = SpecSet::collision_avoidance(cfg.monitor.safety_bound, cfg.monitor.time_bound);

  SystemState q0{initial.phi, initial.synthesis.choice.candidate, 0};
  DatasetPool pool{initial.datasets[0], initial.datasets[1], initial.datasets[2], initial.datasets[3]};
  Predictor override_predictor;
  if (cfg.method == Method::Random) override_predictor = random_guess_predictor(seeds.random_guess);
  Runtime runtime(q0, std::move(pool), rc, override_predictor);

  WorldConfig wc;
  wc.constants = cfg.constants;
  World world(wc, seeds.world);
  std::mt19937_64 controller_rng(seeds.controller);
  Monitor monitor(cfg.monitor);

  ExperimentResult result;
  result.initial_kappa = q0.kappa;
  Metrics& m = result.metrics;
  m.trace_hash = hex64(fnv1a64(trace_csv));

  std::ostringstream monitor_csv;
  monitor_csv << "step,prediction,truth,window_accuracy,period_safety,period_time,repair\n";
  std::vector<StepRow> steps;
  PeriodAccumulator period;
  std::size_t next_query = 0;
  std::size_t step_queries = 0, step_correct = 0;

  const SampleSource source = [&]() -> std::optional<Sample> {
    if (next_query >= trace.size()) return std::nullopt;
    return trace[next_query++];
  };
  const DecideFn decide = [&](const Features& x) {
    const StepResult r = runtime.step(x, controller_rng);
    ++m.runtime_steps;
    return Decision{r.action, *r.prediction};
  };
  const QueryHook hook = [&](const QueryRecord& q) {
    const bool correct = q.prediction == q.sample.y;
    ++m.queries;
    m.correct += correct ? 1 : 0;
    ++period.queries;
    period.correct += correct ? 1 : 0;
    ++step_queries;
    step_correct += correct ? 1 : 0;
    monitor.observe({q.sample.x, q.prediction, q.sample.y, monitor.steps()});

    bool signalled = false;
    if (monitor.at_period_boundary()) {
      const std::size_t index = monitor.completed_periods() - 1;
      const RepairDecision d = monitor.close_period();
      if (cfg.method == Method::Sadeepdecs && d.repair && !runtime.repair_in_flight()) {
        RepairSignal sig{monitor.steps(), index, d.reasons};
        signalled = runtime.request_repair(sig, monitor.drain_counterexamples(index));
        m.repairs_signalled += signalled ? 1 : 0;
      }
      PeriodMetrics pm;
      pm.period = index;
      pm.accuracy = static_cast<double>(period.correct) / static_cast<double>(period.queries);
      pm.safety = period.stats.safety_rate();
      pm.mean_time = period.stats.mean_time();
      pm.version = runtime.active_state().version;
      pm.repair_signalled = signalled;
      m.periods.push_back(pm);
    }
    const auto& ps = monitor.period_stats();
    monitor_csv << (monitor.steps() - 1) << ',' << q.prediction << ',' << q.sample.y << ','
                << format_double(monitor.window().running_accuracy()) << ','
                << format_double(ps.safety_rate()) << ',' << format_double(ps.mean_time()) << ','
                << (signalled ? 1 : 0) << '\n';
    if (monitor.at_period_boundary()) period = PeriodAccumulator{};
  };

  while (true) {
    step_queries = step_correct = 0;
    // a step without collider consumes no trace entry, so stop once the trace is spent
    if (next_query >= trace.size()) break;
    const StepRecord rec = world.step(source, decide, hook);
    if (rec.outcome == StepOutcome::Incomplete) {
      // keeps the queries of the unfinished last step in the step log
      if (step_queries > 0)
        steps.push_back({steps.size(), rec.outcome, rec.waits, rec.elapsed, step_queries, step_correct,
                         runtime.active_state().version});
      break;
    }
    const bool collided = rec.outcome == StepOutcome::Collision;
    monitor.record_attempt(collided, rec.elapsed);
    period.stats.record(collided, rec.elapsed);
    ++m.attempts;
    m.collisions += collided ? 1 : 0;
    m.total_time += rec.elapsed;
    steps.push_back({steps.size(), rec.outcome, rec.waits, rec.elapsed, step_queries, step_correct,
                     runtime.active_state().version});
  }
  runtime.finish_pending_repair();

  m.accuracy = m.queries ? static_cast<double>(m.correct) / static_cast<double>(m.queries) : 0.0;
  m.safety = m.attempts ? static_cast<double>(m.attempts - m.collisions) / static_cast<double>(m.attempts) : 1.0;
  m.mean_time = m.attempts ? m.total_time / static_cast<double>(m.attempts) : 0.0;
  for (const auto& r : runtime.repair_history()) (r.accepted ? m.repairs_accepted : m.repairs_rejected)++;
  m.unserved = runtime.unserved();
  m.invariant_checks = runtime.invariant_checks();
  result.final_kappa = runtime.active_state().kappa;
  result.events = runtime.events();
  result.repairs = runtime.repair_history();

  if (cfg.out_dir.empty()) return result;

  const std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);

  std::ostringstream metrics;
  metrics << "method,env,queries,correct,attempts,collisions,total_time,accuracy,safety,mean_time,"
             "repairs_signalled,repairs_accepted,repairs_rejected,unserved\n"
          << to_string(cfg.method) << ',' << to_string(cfg.env) << ',' << m.queries << ',' << m.correct << ','
          << m.attempts << ',' << m.collisions << ',' << format_double(m.total_time) << ','
          << format_double(m.accuracy) << ',' << format_double(m.safety) << ',' << format_double(m.mean_time)
          << ',' << m.repairs_signalled << ',' << m.repairs_accepted << ',' << m.repairs_rejected << ','
          << m.unserved << '\n';
  write_file(dir / "metrics.csv", metrics.str());

  std::ostringstream series;
  series << "period,accuracy,safety,mean_time,version,repair\n";
  for (const auto& p : m.periods)
    series << p.period << ',' << format_double(p.accuracy) << ',' << format_double(p.safety) << ','
           << format_double(p.mean_time) << ',' << p.version << ',' << (p.repair_signalled ? 1 : 0) << '\n';
  write_file(dir / "series.csv", series.str());

  std::ostringstream step_csv;
  step_csv << "step,outcome,waits,elapsed,queries,correct,version\n";
  for (const auto& s : steps)
    step_csv << s.index << ',' << outcome_name(s.outcome) << ',' << s.waits << ',' << format_double(s.elapsed)
             << ',' << s.queries << ',' << s.correct << ',' << s.version << '\n';
  write_file(dir / "steps.csv", step_csv.str());

  write_file(dir / "monitor_trace.csv", monitor_csv.str());
  write_file(dir / "events.csv", runtime.events_csv());
  write_file(dir / "trace.csv", trace_csv);

  json meta;
  meta["method"] = std::string(to_string(cfg.method));
  meta["env"] = std::string(to_string(cfg.env));
  meta["seed"] = cfg.seed;
  meta["seeds"] = {{"initial_data", seeds.initial_data}, {"initial_training", seeds.initial_training},
                   {"trace", seeds.trace}, {"world", seeds.world}, {"controller", seeds.controller},
                   {"repair", seeds.repair}, {"random_guess", seeds.random_guess}};
  ExperimentConfig hashed = cfg;
  hashed.out_dir.clear();
  meta["config_hash"] = hex64(fnv1a64(config_to_json(hashed)));
  meta["trace_hash"] = m.trace_hash;
  meta["initial_kappa"] = kappa_text(result.initial_kappa);
  meta["final_kappa"] = kappa_text(result.final_kappa);
  meta["config"] = json::parse(config_to_json(hashed));
  write_file(dir / "run.json", meta.dump(2) + "\n");
  return result;
}

// ---------------------------------------------------------------------------
// Summaries

std::string Summary::to_text() const {
  std::ostringstream out;
  out << std::left << std::setw(8) << "method" << std::setw(6) << "env" << std::right << std::setw(10)
      << "accuracy" << std::setw(10) << "safety" << std::setw(10) << "time" << '\n';
  out << std::fixed;
  for (const auto& r : rows)
    out << std::left << std::setw(8) << r.method << std::setw(6) << r.env << std::right << std::setprecision(1)
        << std::setw(9) << 100.0 * r.accuracy << '%' << std::setw(9) << 100.0 * r.safety << '%'
        << std::setprecision(2) << std::setw(10) << r.mean_time << '\n';
  return out.str();
}

std::string Summary::to_csv() const {
  std::ostringstream out;
  out << "dir,method,env,accuracy,safety,mean_time\n";
  for (const auto& r : rows)
    out << r.dir << ',' << r.method << ',' << r.env << ',' << format_double(r.accuracy) << ','
        << format_double(r.safety) << ',' << format_double(r.mean_time) << '\n';
  return out.str();
}

Summary summarize(const std::vector<std::filesystem::path>& run_dirs) {
  if (run_dirs.empty()) throw std::runtime_error("summarize: no run directories given");
  Summary summary;
  for (const auto& dir : run_dirs) {
    const auto metrics_path = dir / "metrics.csv";
    const auto steps_path = dir / "steps.csv";
    if (!std::filesystem::exists(metrics_path) || !std::filesystem::exists(steps_path))
      throw std::runtime_error("incomplete run directory: " + dir.string());

    const auto mrows = read_csv(metrics_path);
    if (mrows.size() != 2 || mrows[0].size() != mrows[1].size())
      throw std::runtime_error("malformed metrics.csv in " + dir.string());
    auto column = [&](const std::string& name) -> const std::string& {
      for (std::size_t i = 0; i < mrows[0].size(); ++i)
        if (mrows[0][i] == name) return mrows[1][i];
      throw std::runtime_error("metrics.csv lacks column " + name);
    };

    std::size_t queries = 0, correct = 0, attempts = 0, collisions = 0;
    double total_time = 0.0;
    const auto srows = read_csv(steps_path);
    for (std::size_t i = 1; i < srows.size(); ++i) {
      const auto& r = srows[i];
      if (r.size() != 7) throw std::runtime_error("malformed steps.csv in " + dir.string());
      queries += static_cast<std::size_t>(parse_integer(r[4]));
      correct += static_cast<std::size_t>(parse_integer(r[5]));
      if (r[1] == "incomplete") continue;
      ++attempts;
      collisions += r[1] == "collision" ? 1 : 0;
      total_time += parse_double(r[3]);
    }
    SummaryRow row;
    row.dir = dir.string();
    row.method = column("method");
    row.env = column("env");
    row.accuracy = queries ? static_cast<double>(correct) / static_cast<double>(queries) : 0.0;
    row.safety = attempts ? static_cast<double>(attempts - collisions) / static_cast<double>(attempts) : 1.0;
    row.mean_time = attempts ? total_time / static_cast<double>(attempts) : 0.0;

    const double recorded_time = parse_double(column("total_time"));
    if (static_cast<std::size_t>(parse_integer(column("attempts"))) != attempts ||
        static_cast<std::size_t>(parse_integer(column("queries"))) != queries ||
        static_cast<std::size_t>(parse_integer(column("correct"))) != correct ||
        static_cast<std::size_t>(parse_integer(column("collisions"))) != collisions ||
        recorded_time != total_time)
      throw std::runtime_error("steps.csv disagrees with metrics.csv in " + dir.string());
    summary.rows.push_back(row);
  }
  return summary;
}

}  // namespace sadeepdecs
