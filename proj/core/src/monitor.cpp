#include "sadeepdecs/monitor.hpp"

#include <vector>

#include "sadeepdecs/uq.hpp"

namespace sadeepdecs {

SlidingWindow::SlidingWindow(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("sliding window capacity must be positive");
}

void SlidingWindow::push(const Observation& obs) {
  if (!items_.empty() && obs.step <= items_.back().step)
    throw MonitorError("observation step " + std::to_string(obs.step) + " is not after " +
                       std::to_string(items_.back().step));
  if (items_.size() == capacity_) {
    correct_ -= items_.front().prediction == items_.front().truth ? 1 : 0;
    items_.pop_front();
  }
  items_.push_back(obs);
  correct_ += obs.prediction == obs.truth ? 1 : 0;
}

double SlidingWindow::running_accuracy() const {
  if (items_.empty()) throw MonitorError("accuracy of an empty window is undefined");
  return static_cast<double>(correct_) / static_cast<double>(items_.size());
}

double SlidingWindow::accuracy() const {
  if (items_.empty()) throw MonitorError("accuracy of an empty window is undefined");
  std::vector<int> predictions, truths;
  predictions.reserve(items_.size());
  truths.reserve(items_.size());
  for (const auto& o : items_) {
    predictions.push_back(o.prediction);
    truths.push_back(o.truth);
  }
  return sadeepdecs::accuracy(predictions, truths);
}

void RunningStats::record(bool collided, double elapsed) {
  ++attempts;
  collisions += collided ? 1 : 0;
  total_time += elapsed;
}

double RunningStats::safety_rate() const {
  return attempts == 0 ? 1.0 : static_cast<double>(attempts - collisions) / static_cast<double>(attempts);
}

double RunningStats::mean_time() const {
  return attempts == 0 ? 0.0 : total_time / static_cast<double>(attempts);
}

std::string RepairDecision::reason_text() const {
  std::string out;
  auto add = [&](RepairReason r, const char* name) {
    if (!has(r)) return;
    if (!out.empty()) out += '|';
    out += name;
  };
  add(RepairReason::Accuracy, "accuracy");
  add(RepairReason::Safety, "safety");
  add(RepairReason::Time, "time");
  return out;
}

RepairDecision should_repair(const SlidingWindow& window, const RunningStats& period,
                             const MonitorConfig& cfg) {
  RepairDecision d;
  d.safety = period.safety_rate();
  d.mean_time = period.mean_time();
  if (window.size() < cfg.window) return d;
  d.evaluated = true;
  d.accuracy = window.accuracy();
  if (d.accuracy < cfg.threshold_1) d.reasons |= static_cast<unsigned>(RepairReason::Accuracy);
  if (d.safety < cfg.safety_bound) d.reasons |= static_cast<unsigned>(RepairReason::Safety);
  if (d.mean_time > cfg.time_bound) d.reasons |= static_cast<unsigned>(RepairReason::Time);
  d.repair = d.reasons != 0;
  return d;
}

Monitor::Monitor(MonitorConfig cfg) : cfg_(cfg), window_(cfg.window) {
  if (cfg.t_monitor == 0) throw std::invalid_argument("T_monitor must be at least 1");
  if (!(cfg.threshold_1 >= 0.0 && cfg.threshold_1 <= 1.0) || !(cfg.threshold_2 >= 0.0 && cfg.threshold_2 <= 1.0))
    throw std::invalid_argument("monitor thresholds must lie in [0,1]");
  log_.emplace_back();
  drained_.push_back(false);
}

void Monitor::observe(const Observation& obs) {
  window_.push(obs);
  if (obs.prediction != obs.truth) log_.back().push_back(obs);
  ++steps_;
  if (steps_ % cfg_.t_monitor == 0) {
    log_.emplace_back();
    drained_.push_back(false);
  }
}

void Monitor::record_attempt(bool collided, double elapsed) { period_.record(collided, elapsed); }

RepairDecision Monitor::close_period() {
  RepairDecision d = should_repair(window_, period_, cfg_);
  period_ = RunningStats{};
  return d;
}

Dataset Monitor::drain_counterexamples(std::size_t period) {
  if (period >= completed_periods())
    throw MonitorError("period " + std::to_string(period) + " has not finished");
  if (period < log_base_ || drained_[period])
    throw MonitorError("period " + std::to_string(period) + " was already drained");
  Dataset ce;
  ce.role = Role::Window;
  for (const auto& o : log_[period - log_base_]) ce.samples.push_back({o.x, o.truth});
  drained_[period] = true;
  log_[period - log_base_].clear();
  log_[period - log_base_].shrink_to_fit();
  while (log_.size() > 1 && drained_[log_base_]) {
    log_.pop_front();
    ++log_base_;
  }
  return ce;
}

}  // namespace sadeepdecs
