#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include "sadeepdecs/dataset.hpp"

namespace sadeepdecs {

class MonitorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Observation {
  Features x{};
  int prediction = 0;
  int truth = 0;
  std::uint64_t step = 0;  // perception query index
};

struct MonitorConfig {
  std::size_t t_monitor = 1250;  // queries per period
  std::size_t window = 1000;
  double threshold_1 = 0.9;  // window accuracy below this signals a shift
  double threshold_2 = 0.8;  // repaired model must reach this test accuracy
  double safety_bound = 0.9;
  double time_bound = 15.0;
};

/// Bounded FIFO of the most recent observations.
class SlidingWindow {
 public:
  explicit SlidingWindow(std::size_t capacity);

  /// Appends, evicting the oldest entry at capacity. Step indices must
  /// increase strictly.
  void push(const Observation& obs);

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool full() const { return items_.size() == capacity_; }
  const std::deque<Observation>& items() const { return items_; }

  /// Fraction of correct predictions; throws MonitorError when empty.
  double accuracy() const;
  /// Same value from an incrementally maintained count, O(1).
  double running_accuracy() const;

 private:
  std::size_t capacity_;
  std::size_t correct_ = 0;
  std::deque<Observation> items_;
};

/// Movement statistics over one monitoring period.
struct RunningStats {
  std::size_t attempts = 0;
  std::size_t collisions = 0;
  double total_time = 0.0;

  void record(bool collided, double elapsed);
  double safety_rate() const;  // 1 when no attempt has finished yet
  double mean_time() const;    // 0 when no attempt has finished yet
};

enum class RepairReason : unsigned { Accuracy = 1u, Safety = 2u, Time = 4u };

struct RepairDecision {
  bool evaluated = false;  // false when the window was not yet full
  bool repair = false;
  unsigned reasons = 0;    // RepairReason bits
  double accuracy = 0.0;
  double safety = 0.0;
  double mean_time = 0.0;

  bool has(RepairReason r) const { return (reasons & static_cast<unsigned>(r)) != 0; }
  std::string reason_text() const;
};

/// Repair iff window accuracy < threshold_1, period safety < safety_bound
/// or period mean time > time_bound. Skipped (evaluated = false) while the
/// window holds fewer than `cfg.window` observations.
RepairDecision should_repair(const SlidingWindow& window, const RunningStats& period,
                             const MonitorConfig& cfg);

/// Observation log, window and per-period statistics for one run.
class Monitor {
 public:
  explicit Monitor(MonitorConfig cfg);

  /// Records a labelled perception query.
  void observe(const Observation& obs);
  /// Records a finished movement attempt in the current period.
  void record_attempt(bool collided, double elapsed);

  /// Number of queries observed so far.
  std::uint64_t steps() const { return steps_; }
  bool at_period_boundary() const { return steps_ > 0 && steps_ % cfg_.t_monitor == 0; }
  std::size_t completed_periods() const { return static_cast<std::size_t>(steps_ / cfg_.t_monitor); }

  /// Evaluates the period that just ended and starts a new one.
  RepairDecision close_period();

  /// Misclassified observations of period `period` ([p*T, (p+1)*T)) as
  /// labelled samples; the period's log is released afterwards. Throws
  /// MonitorError if the period has not finished or was already drained.
  Dataset drain_counterexamples(std::size_t period);

  const SlidingWindow& window() const { return window_; }
  const RunningStats& period_stats() const { return period_; }
  const MonitorConfig& config() const { return cfg_; }

 private:
  MonitorConfig cfg_;
  SlidingWindow window_;
  RunningStats period_;
  std::uint64_t steps_ = 0;
  std::size_t log_base_ = 0;               // first period still held in log_
  std::deque<std::vector<Observation>> log_;  // misclassified observations per period
  std::vector<bool> drained_;
};

}  // namespace sadeepdecs
