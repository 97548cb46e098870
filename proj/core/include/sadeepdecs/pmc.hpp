#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sadeepdecs/candidate_grid.hpp"
#include "sadeepdecs/pdtmc.hpp"
#include "sadeepdecs/uq.hpp"

namespace sadeepdecs {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kInfiniteReward = std::numeric_limits<double>::infinity();

enum class Comparison { AtLeast, AtMost };

/// P[ !avoid U target ] compared against `bound`.
struct StateSpec {
  std::string name;
  std::string avoid;
  std::string target;
  Comparison cmp = Comparison::AtLeast;
  double bound = 0.0;
  bool satisfied_by(double probability) const;
};

/// R[ F targets ] <= bound.
struct RewardSpec {
  std::string name;
  std::vector<std::string> targets;
  Comparison cmp = Comparison::AtMost;
  double bound = 0.0;
  bool satisfied_by(double reward) const;
};

struct SpecSet {
  std::vector<StateSpec> states;
  std::vector<RewardSpec> rewards;

  /// P[!collision U done] >= safety, R[F {done, collision}] <= time.
  static SpecSet collision_avoidance(double safety_bound = 0.9, double time_bound = 15.0);
};

struct SolveResult {
  std::vector<double> values;  // per state
  double residual = 0.0;       // max-norm residual of the reduced linear system
  std::size_t unknowns = 0;
};

/// Dense system A x = b. Gaussian elimination with partial pivoting up to
/// `dense_limit` unknowns, Gauss-Seidel (tol 1e-12, 10^6 sweeps) above.
/// Throws SolverError on a singular or non-converging system.
std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b, std::size_t n,
                                 std::size_t dense_limit = 2000);

SolveResult until_values(const Dtmc& chain, std::string_view avoid, std::string_view target);
double until_probability(const Dtmc& chain, std::string_view avoid, std::string_view target);

/// Expected transition reward accumulated before first entering a target
/// state, per state; kInfiniteReward where targets are not almost sure.
SolveResult reward_values(const Dtmc& chain, std::span<const std::string> targets);
double expected_reward_to_absorption(const Dtmc& chain, std::span<const std::string> targets);

struct SimulationResult {
  std::size_t paths = 0;
  std::size_t successes = 0;      // paths satisfying !avoid U target
  double probability = 0.0;
  double mean_reward = 0.0;       // over paths that reached a reward target
  double reward_variance = 0.0;   // sample variance of the path rewards
  std::size_t unreached = 0;      // paths absorbed without reaching a reward target
  std::size_t cap_hits = 0;       // paths cut at the step cap
};

inline constexpr std::size_t kSimulationStepCap = 1'000'000;

/// Monte-Carlo estimate from `n` independent paths (seeded). A path runs
/// until it is absorbed, or until both the until-formula is decided and a
/// reward target has been entered.
SimulationResult simulate_chain(const Dtmc& chain, std::string_view avoid, std::string_view target,
                                std::span<const std::string> reward_targets, std::size_t n,
                                std::uint64_t seed, std::size_t step_cap = kSimulationStepCap);

/// Per-candidate model-checking results.
struct QrTable {
  std::vector<std::string> candidate_names;
  std::vector<Candidate> candidates;
  std::vector<std::string> state_spec_names;
  std::vector<std::string> reward_spec_names;
  std::vector<std::vector<double>> probabilities;  // [candidate][state spec]
  std::vector<std::vector<double>> rewards;        // [candidate][reward spec]

  std::size_t size() const { return candidates.size(); }
  std::string to_csv() const;
};

/// Instantiates `model` with fixed parameters, rates `u` and each grid
/// candidate, then evaluates every spec. `workers` > 1 fans candidates out
/// over threads; row order is always the grid order.
QrTable quantify_candidates(const Pdtmc& model, const Valuation& fixed, const UncertaintyVector& u,
                            const CandidateGrid& grid, const SpecSet& specs, unsigned workers = 1);

}  // namespace sadeepdecs
