#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sadeepdecs/expr.hpp"

namespace sadeepdecs {

/// Syntax or structural error in model text. `line()` is 1-based, 0 when
/// the error is not tied to a line.
class ModelError : public std::runtime_error {
 public:
  ModelError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class InstantiationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParamDecl {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  friend bool operator==(const ParamDecl&, const ParamDecl&) = default;
};

struct StateDecl {
  std::string name;
  std::vector<std::string> labels;
  bool has_label(std::string_view label) const;
  friend bool operator==(const StateDecl&, const StateDecl&) = default;
};

struct ParamTransition {
  std::size_t src = 0;
  std::size_t dst = 0;
  ParamExpr prob;
  friend bool operator==(const ParamTransition&, const ParamTransition&) = default;
};

struct TransitionReward {
  std::size_t src = 0;
  std::size_t dst = 0;
  double value = 0.0;
  friend bool operator==(const TransitionReward&, const TransitionReward&) = default;
};

/// Parametric DTMC: transition probabilities are expressions over the
/// declared parameters; rewards are attached to transitions.
struct Pdtmc {
  std::vector<ParamDecl> params;
  std::vector<StateDecl> states;
  std::size_t initial = 0;
  std::vector<ParamTransition> transitions;
  std::vector<TransitionReward> rewards;

  std::optional<std::size_t> state_index(std::string_view name) const;
  const ParamDecl* find_param(std::string_view name) const;

  friend bool operator==(const Pdtmc&, const Pdtmc&) = default;
};

struct Edge {
  std::size_t dst = 0;
  double prob = 0.0;
  double reward = 0.0;
};

/// Concrete chain. Rows hold one edge per distinct successor.
struct Dtmc {
  std::vector<StateDecl> states;
  std::size_t initial = 0;
  std::vector<std::vector<Edge>> rows;

  std::size_t size() const { return states.size(); }
  /// Indices of states carrying `label`; throws std::invalid_argument if none.
  std::vector<std::size_t> labelled(std::string_view label) const;
  bool is_absorbing(std::size_t s) const;
};

struct StochasticViolation {
  enum class Kind { RowSum, Range };
  std::size_t state = 0;
  Kind kind = Kind::RowSum;
  double value = 0.0;  // offending row sum or probability
  std::string describe(const Dtmc& chain) const;
};

inline constexpr double kStochasticTolerance = 1e-9;

Pdtmc parse_model(std::string_view text);
std::string serialize_model(const Pdtmc& model);
Pdtmc load_model(const std::string& path);

/// Evaluates every transition under `valuation`. Parallel transitions are
/// merged; states without outgoing transitions get a reward-free self-loop.
Dtmc instantiate(const Pdtmc& model, const Valuation& valuation);

std::vector<StochasticViolation> validate_stochastic(const Dtmc& chain);

struct ModelConstants {
  double p_collider = 0.8;
  double p_occ = 0.25;
  double t_move = 10.0;
  double t_wait = 2.0;
};

/// One-step movement chain of the collision-avoidance case study:
///
///   check --(1-p_collider, move)--> done
///   check --p_collider--> encounter --p_occ--> danger, --(1-p_occ)--> safe
///   danger --p10--> danger_pred0, --p11--> danger_pred1
///   safe   --p00--> safe_pred0,   --p01--> safe_pred1
///   *_pred0 --c1 (move)--> collision | done;  --(1-c1) (wait)--> check
///   *_pred1 --c2 (move)--> collision | done;  --(1-c2) (wait)--> check
///
/// Moves out of a danger state end in `collision`, all other moves in
/// `done`. Move transitions carry reward t_move, waits carry t_wait.
Pdtmc reference_model(const ModelConstants& constants = {});

/// Full valuation for reference_model(): constants, confusion rates
/// (p00, p01, p10, p11) and controller parameters (c1, c2).
Valuation reference_valuation(const ModelConstants& constants,
                              const Valuation& rates_and_controls);

}  // namespace sadeepdecs
