#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sadeepdecs/dataset.hpp"
#include "sadeepdecs/mlp.hpp"
#include "sadeepdecs/monitor.hpp"
#include "sadeepdecs/pdtmc.hpp"
#include "sadeepdecs/runtime.hpp"
#include "sadeepdecs/simenv.hpp"
#include "sadeepdecs/synthesis.hpp"

namespace sadeepdecs {

enum class Method { No, Random, Sadeepdecs };
std::string_view to_string(Method m);       // "no", "random", "sa"
Method method_from_string(std::string_view text);
std::string_view to_string(EnvMode e);      // "us", "rw"
EnvMode env_from_string(std::string_view text);

struct ExperimentConfig {
  Method method = Method::Sadeepdecs;
  EnvMode env = EnvMode::Uniform;
  std::size_t steps = 15000;  // perception queries served by the run
  std::uint64_t seed = 2024;  // master seed; all subsystem seeds derive from it
  MonitorConfig monitor;
  ModelConstants constants;
  std::size_t grid_points = 11;
  std::array<std::size_t, 4> initial_sizes{4000, 1000, 2500, 1000};
  std::array<std::size_t, 4> sample_sizes{4000, 1000, 1000, 1000};
  std::array<double, 4> split_ratios{0.4, 0.2, 0.2, 0.2};
  TrainConfig train;
  OracleConfig oracle;
  Features c0{};  // centre of the initial (non-representative) data
  double eps0 = 0.1;
  WalkConfig walk;
  RepairMode repair_mode = RepairMode::Threaded;
  std::size_t repair_latency = 100;
  std::string trace_path;  // replay this benchmark trace instead of generating one
  std::string out_dir;     // empty: no files written

  ExperimentConfig();
  /// Throws std::invalid_argument on violated invariants.
  void validate() const;
};

std::string config_to_json(const ExperimentConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const std::string& text);

/// Subsystem seeds derived from the master seed.
struct SeedPlan {
  std::uint64_t initial_data;
  std::uint64_t initial_training;
  std::uint64_t trace;
  std::uint64_t world;
  std::uint64_t controller;
  std::uint64_t repair;
  std::uint64_t random_guess;
  static SeedPlan from(std::uint64_t master);
};

/// Network, controller and datasets every method starts from.
struct InitialSystem {
  std::array<Dataset, 4> datasets;  // train, val, confusion, test
  std::shared_ptr<const MlpParams> phi;
  ConfusionMatrix confusion;
  UncertaintyVector u{1.0, 0.0, 0.0, 1.0};
  SynthesisResult synthesis;
  double test_accuracy = 0.0;
};

InitialSystem build_initial_system(const ExperimentConfig& cfg);

struct PeriodMetrics {
  std::size_t period = 0;
  double accuracy = 0.0;
  double safety = 1.0;
  double mean_time = 0.0;
  std::uint64_t version = 0;
  bool repair_signalled = false;
};

struct Metrics {
  std::size_t queries = 0;
  std::size_t correct = 0;
  std::size_t attempts = 0;  // finished one-step movements
  std::size_t collisions = 0;
  double total_time = 0.0;
  double accuracy = 0.0;
  double safety = 1.0;
  double mean_time = 0.0;
  std::size_t repairs_signalled = 0;
  std::size_t repairs_accepted = 0;
  std::size_t repairs_rejected = 0;
  std::size_t unserved = 0;
  std::uint64_t runtime_steps = 0;
  std::uint64_t invariant_checks = 0;
  std::string trace_hash;
  std::vector<PeriodMetrics> periods;  // one per full T_monitor block
};

struct ExperimentResult {
  Metrics metrics;
  Candidate initial_kappa;
  Candidate final_kappa;
  std::vector<RuntimeEvent> events;
  std::vector<RepairOutcome> repairs;
};

/// Benchmark trace: generated from the config's seed and environment, or
/// read from cfg.trace_path.
std::vector<Sample> benchmark_trace(const ExperimentConfig& cfg);
std::string trace_to_csv(const std::vector<Sample>& trace);

/// Runs one method on one environment. When cfg.out_dir is set, writes
/// metrics.csv, series.csv, steps.csv, monitor_trace.csv, events.csv,
/// trace.csv and run.json there.
ExperimentResult run_experiment(const ExperimentConfig& cfg);
ExperimentResult run_experiment(const ExperimentConfig& cfg, const InitialSystem& initial);

struct SummaryRow {
  std::string dir;
  std::string method;
  std::string env;
  double accuracy = 0.0;
  double safety = 0.0;
  double mean_time = 0.0;
};

struct Summary {
  std::vector<SummaryRow> rows;
  std::string to_text() const;
  std::string to_csv() const;
};

/// Recomputes every run's averages from its steps.csv and checks them
/// against metrics.csv. Throws std::runtime_error on an incomplete
/// directory or a mismatch.
Summary summarize(const std::vector<std::filesystem::path>& run_dirs);

}  // namespace sadeepdecs
