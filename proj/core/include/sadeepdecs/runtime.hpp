#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sadeepdecs/candidate_grid.hpp"
#include "sadeepdecs/dataset.hpp"
#include "sadeepdecs/mlp.hpp"
#include "sadeepdecs/pdtmc.hpp"
#include "sadeepdecs/pmc.hpp"
#include "sadeepdecs/simenv.hpp"
#include "sadeepdecs/synthesis.hpp"
#include "sadeepdecs/uq.hpp"

namespace sadeepdecs {

/// q = (phi, kappa) plus its version; version grows only on accepted repairs.
struct SystemState {
  std::shared_ptr<const MlpParams> phi;
  Candidate kappa;  // (c1, c2): move probability given prediction 0 / 1
  std::uint64_t version = 0;
};

enum class ComponentId { A, B };
std::string_view to_string(ComponentId id);

struct Component {
  ComponentId id = ComponentId::A;
  bool prediction_active = false;
  bool repair_active = false;
  std::shared_ptr<const SystemState> state;
};

/// Exchanges the prediction/repair activation of two components.
void swap_activation(Component& a, Component& b);

struct RepairSignal {
  std::uint64_t query = 0;
  std::size_t period = 0;
  unsigned reasons = 0;
};

/// Exchange point between the prediction loop and the repair component.
/// Every slot holds an immutable snapshot; readers get the whole value or
/// nothing.
class Cache {
 public:
  void post_signal(const RepairSignal& signal);
  std::optional<RepairSignal> take_signal();

  void post_counterexamples(std::shared_ptr<const Dataset> ce);
  std::shared_ptr<const Dataset> take_counterexamples();

  void publish_state(std::shared_ptr<const SystemState> state);
  std::shared_ptr<const SystemState> latest_state() const;

 private:
  mutable std::mutex mutex_;
  std::optional<RepairSignal> signal_;
  std::shared_ptr<const Dataset> counterexamples_;
  std::shared_ptr<const SystemState> state_;
};

/// The four accumulating dataset pools of the repair loop.
struct DatasetPool {
  Dataset train{Role::Train, {}};
  Dataset val{Role::Val, {}};
  Dataset confusion{Role::Confusion, {}};
  Dataset test{Role::Test, {}};
};

struct RepairConfig {
  std::array<double, 4> split_ratios{0.4, 0.2, 0.2, 0.2};
  std::array<std::size_t, 4> sample_sizes{4000, 1000, 1000, 1000};
  TrainConfig train;
  double threshold_2 = 0.8;
  Pdtmc model = reference_model();
  Valuation fixed;  // non-controller, non-rate parameters (p_collider, p_occ)
  ParamSpace space = ParamSpace::controller();
  SpecSet specs = SpecSet::collision_avoidance();
  bool warm_start = true;  // start SGD from the current phi
};

struct RepairOutcome {
  bool accepted = false;
  std::string cause;
  std::shared_ptr<const SystemState> state;  // set when accepted
  DatasetPool pool;                          // pools after the merge step
  std::array<std::size_t, 4> ce_sizes{};
  std::array<std::size_t, 4> sampled_sizes{};
  double test_accuracy = 0.0;
  std::optional<UncertaintyVector> u;
  std::optional<SynthesisResult> synthesis;
};

/// Split the counterexamples, merge them into the pools, resample the
/// training sets, retrain, gate on test accuracy and, when accepted,
/// quantify the new network and re-synthesize the controller.
RepairOutcome run_repair(const SystemState& current, const Dataset& counterexamples,
                         const DatasetPool& pool, const RepairConfig& cfg, std::uint64_t seed);

enum class RepairMode { Threaded, Sequential };

struct RuntimeConfig {
  RepairMode mode = RepairMode::Threaded;
  /// Queries between a repair signal and the role swap. The swap happens
  /// at exactly this boundary in both modes, so results do not depend on
  /// thread timing.
  std::size_t repair_latency = 100;
  RepairConfig repair;
  std::uint64_t seed = 1;
};

struct RuntimeEvent {
  std::uint64_t query = 0;
  ComponentId active = ComponentId::A;
  std::uint64_t version = 0;
  std::string event;
};

struct StepResult {
  Action action = Action::Move;
  std::optional<int> prediction;  // empty when no collider was present
  ComponentId served_by = ComponentId::A;
  std::uint64_t version = 0;
};

/// Two functionally identical components; one predicts while the other
/// repairs, and they swap roles after an accepted repair.
class Runtime {
 public:
  /// `override_predictor` replaces the network for prediction (coin-flip baseline).
  Runtime(SystemState q0, DatasetPool pool, RuntimeConfig cfg, Predictor override_predictor = {});
  ~Runtime();
  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  /// Serves one decision. Without a collider the robot moves. Otherwise
  /// the active component predicts and the controller moves with
  /// probability c1 (prediction 0) or c2 (prediction 1).
  StepResult step(const std::optional<Features>& input, std::mt19937_64& rng);

  /// Posts a repair signal with its counterexamples and starts the repair
  /// on the inactive component. Returns false (signal dropped) while a
  /// repair is in flight.
  bool request_repair(const RepairSignal& signal, Dataset counterexamples);

  /// Swaps prediction roles. Only valid after an accepted repair has been
  /// collected; otherwise a warning event is logged and nothing changes.
  bool swap_roles();

  /// Waits for any in-flight repair and applies it immediately.
  void finish_pending_repair();

  const SystemState& active_state() const;
  ComponentId active_id() const;
  const Component& component(ComponentId id) const;
  bool repair_in_flight() const { return pending_.has_value(); }
  std::uint64_t queries_served() const { return queries_; }
  std::uint64_t unserved() const { return unserved_; }
  std::uint64_t invariant_checks() const { return invariant_checks_; }
  const std::vector<RuntimeEvent>& events() const { return events_; }
  const std::vector<RepairOutcome>& repair_history() const { return history_; }
  const DatasetPool& pool() const { return pool_; }
  const Cache& cache() const { return cache_; }
  std::string events_csv() const;

 private:
  struct Pending {
    std::uint64_t due = 0;
    std::future<RepairOutcome> future;           // threaded mode
    std::optional<RepairOutcome> ready;          // sequential mode
  };

  void collect_due_repair();
  void apply(RepairOutcome outcome);
  void check_invariant();
  Component& active();
  Component& standby();
  void log(const std::string& event);

  RuntimeConfig cfg_;
  Predictor override_;
  std::array<Component, 2> components_;
  Cache cache_;
  DatasetPool pool_;
  std::optional<Pending> pending_;
  bool swap_ready_ = false;
  std::uint64_t queries_ = 0;
  std::uint64_t unserved_ = 0;
  std::uint64_t invariant_checks_ = 0;
  std::uint64_t repairs_started_ = 0;
  std::vector<RuntimeEvent> events_;
  std::vector<RepairOutcome> history_;
};

}  // namespace sadeepdecs
