#include "sadeepdecs/runtime.hpp"

#include <algorithm>
#include <stdexcept>
#include <sstream>

namespace sadeepdecs {

std::string_view to_string(ComponentId id) { return id == ComponentId::A ? "A" : "B"; }

void swap_activation(Component& a, Component& b) {
  std::swap(a.prediction_active, b.prediction_active);
}

// ---------------------------------------------------------------------------
// Cache

void Cache::post_signal(const RepairSignal& signal) {
  std::lock_guard lock(mutex_);
  signal_ = signal;
}

std::optional<RepairSignal> Cache::take_signal() {
  std::lock_guard lock(mutex_);
  auto s = signal_;
  signal_.reset();
  return s;
}

void Cache::post_counterexamples(std::shared_ptr<const Dataset> ce) {
  std::lock_guard lock(mutex_);
  counterexamples_ = std::move(ce);
}

std::shared_ptr<const Dataset> Cache::take_counterexamples() {
  std::lock_guard lock(mutex_);
  return std::exchange(counterexamples_, nullptr);
}

void Cache::publish_state(std::shared_ptr<const SystemState> state) {
  std::lock_guard lock(mutex_);
  state_ = std::move(state);
}

std::shared_ptr<const SystemState> Cache::latest_state() const {
  std::lock_guard lock(mutex_);
  return state_;
}

// ---------------------------------------------------------------------------
// Repair pipeline

RepairOutcome run_repair(const SystemState& current, const Dataset& counterexamples,
                         const DatasetPool& pool, const RepairConfig& cfg, std::uint64_t seed) {
  RepairOutcome out;

  // (i) network update
  const auto parts = split_counterexamples(counterexamples, cfg.split_ratios, seed);
  for (std::size_t k = 0; k < 4; ++k) out.ce_sizes[k] = parts[k].size();
  out.pool.train = merge_datasets(pool.train, parts[0]);
  out.pool.val = merge_datasets(pool.val, parts[1]);
  out.pool.confusion = merge_datasets(pool.confusion, parts[2]);
  out.pool.test = merge_datasets(pool.test, parts[3]);

  const Dataset train_set = sample_dataset(out.pool.train, cfg.sample_sizes[0], seed + 1);
  const Dataset val_set = sample_dataset(out.pool.val, cfg.sample_sizes[1], seed + 2);
  const Dataset confusion_set = sample_dataset(out.pool.confusion, cfg.sample_sizes[2], seed + 3);
  const Dataset test_set = sample_dataset(out.pool.test, cfg.sample_sizes[3], seed + 4);
  out.sampled_sizes = {train_set.size(), val_set.size(), confusion_set.size(), test_set.size()};

  TrainConfig tc = cfg.train;
  tc.seed = seed + 5;
  TrainResult trained;
  try {
    const MlpParams init = cfg.warm_start && current.phi ? *current.phi
                                                         : MlpParams::random(kDefaultWidths, tc.seed);
    trained = train(init, train_set, val_set, tc);
  } catch (const TrainingDiverged& e) {
    out.cause = std::string("training diverged: ") + e.what();
    return out;
  }
  auto phi = std::make_shared<const MlpParams>(std::move(trained.params));
  const Predictor predict = make_predictor(phi);

  out.test_accuracy = accuracy(predict, test_set);
  if (out.test_accuracy < cfg.threshold_2) {
    out.cause = "test accuracy below threshold_2";
    return out;
  }

  // (ii) uncertainty quantification
  try {
    out.u = quantify(evaluate_confusion(predict, confusion_set));
  } catch (const InsufficientSamplesError& e) {
    out.cause = e.what();
    return out;
  }

  // (iii) controller synthesis
  out.synthesis = synthesize(*out.u, cfg.model, cfg.fixed, cfg.space, cfg.specs);
  auto next = std::make_shared<SystemState>();
  next->phi = std::move(phi);
  next->kappa = out.synthesis->choice.candidate;
  next->version = current.version + 1;
  out.state = std::move(next);
  out.accepted = true;
  out.cause = "accepted";
  return out;
}

// ---------------------------------------------------------------------------
// Runtime

Runtime::Runtime(SystemState q0, DatasetPool pool, RuntimeConfig cfg, Predictor override_predictor)
    : cfg_(std::move(cfg)), override_(std::move(override_predictor)), pool_(std::move(pool)) {
  if (!q0.phi && !override_) throw std::invalid_argument("Runtime: initial state has no network");
  if (q0.kappa.values.size() != 2) throw std::invalid_argument("Runtime: controller needs (c1, c2)");
  auto state = std::make_shared<const SystemState>(std::move(q0));
  components_[0] = {ComponentId::A, true, false, state};
  components_[1] = {ComponentId::B, false, false, state};
  cache_.publish_state(state);
}

Runtime::~Runtime() {
  if (pending_ && pending_->future.valid()) pending_->future.wait();
}

Component& Runtime::active() { return components_[0].prediction_active ? components_[0] : components_[1]; }
Component& Runtime::standby() { return components_[0].prediction_active ? components_[1] : components_[0]; }

const SystemState& Runtime::active_state() const {
  return *(components_[0].prediction_active ? components_[0] : components_[1]).state;
}

ComponentId Runtime::active_id() const {
  return components_[0].prediction_active ? ComponentId::A : ComponentId::B;
}

const Component& Runtime::component(ComponentId id) const {
  return components_[id == ComponentId::A ? 0 : 1];
}

void Runtime::log(const std::string& event) {
  events_.push_back({queries_, active_id(), active_state().version, event});
}

void Runtime::check_invariant() {
  ++invariant_checks_;
  int predicting = 0;
  for (const auto& c : components_) {
    if (c.prediction_active && c.repair_active)
      throw std::logic_error("component has both prediction and repair modules active");
    predicting += c.prediction_active ? 1 : 0;
  }
  if (predicting != 1) throw std::logic_error("exactly one prediction module must be active");
}

StepResult Runtime::step(const std::optional<Features>& input, std::mt19937_64& rng) {
  collect_due_repair();
  check_invariant();

  Component& comp = active();
  StepResult r;
  r.served_by = comp.id;
  r.version = comp.state->version;
  if (!input) {
    r.action = Action::Move;
    return r;
  }

  int prediction = -1;
  if (override_)
    prediction = override_(*input);
  else if (comp.state->phi)
    prediction = predict_label(*comp.state->phi, *input);
  if (prediction != 0 && prediction != 1) {
    ++unserved_;
    prediction = 1;
  }
  ++queries_;

  const double move_probability = comp.state->kappa.values[static_cast<std::size_t>(prediction)];
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  r.action = unit(rng) < move_probability ? Action::Move : Action::Wait;
  r.prediction = prediction;
  return r;
}

bool Runtime::request_repair(const RepairSignal& signal, Dataset counterexamples) {
  if (pending_) {
    log("signal-dropped");
    return false;
  }
  cache_.post_signal(signal);
  cache_.post_counterexamples(std::make_shared<const Dataset>(std::move(counterexamples)));
  log("signal");

  // repair component picks the work up from the cache
  const auto sig = cache_.take_signal();
  const auto ce = cache_.take_counterexamples();
  const auto current = cache_.latest_state();
  Component& repairer = standby();
  repairer.repair_active = true;

  const std::uint64_t seed = cfg_.seed + 0x632be59bd9b4e019ULL * (++repairs_started_);
  Pending p;
  p.due = queries_ + cfg_.repair_latency;
  if (cfg_.mode == RepairMode::Sequential) {
    p.ready = run_repair(*current, *ce, pool_, cfg_.repair, seed);
  } else {
    p.future = std::async(std::launch::async, [current, ce, pool = pool_, repair = cfg_.repair, seed] {
      return run_repair(*current, *ce, pool, repair, seed);
    });
  }
  pending_ = std::move(p);
  (void)sig;
  return true;
}

void Runtime::collect_due_repair() {
  if (pending_ && queries_ >= pending_->due) finish_pending_repair();
}

void Runtime::finish_pending_repair() {
  if (!pending_) return;
  RepairOutcome outcome = pending_->ready ? std::move(*pending_->ready) : pending_->future.get();
  pending_.reset();
  apply(std::move(outcome));
}

void Runtime::apply(RepairOutcome outcome) {
  pool_ = outcome.pool;
  Component& repairer = standby();
  repairer.repair_active = false;
  if (outcome.accepted) {
    repairer.state = outcome.state;
    cache_.publish_state(outcome.state);
    swap_ready_ = true;
    log("accept");
    swap_roles();
  } else {
    log("reject: " + outcome.cause);
  }
  outcome.pool = DatasetPool{};
  history_.push_back(std::move(outcome));
}

bool Runtime::swap_roles() {
  if (!swap_ready_) {
    log("warn: swap without completed repair ignored");
    return false;
  }
  // runs between two steps, so no step observes zero or two predictors
  swap_activation(components_[0], components_[1]);
  swap_ready_ = false;
  check_invariant();
  log("swap");
  return true;
}

std::string Runtime::events_csv() const {
  std::ostringstream out;
  out << "query,active,version,event\n";
  for (const auto& e : events_) {
    std::string text = e.event;
    std::replace(text.begin(), text.end(), ',', ';');
    out << e.query << ',' << to_string(e.active) << ',' << e.version << ',' << text << '\n';
  }
  return out.str();
}

}  // namespace sadeepdecs
