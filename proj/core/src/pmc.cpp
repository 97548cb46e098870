#include "sadeepdecs/pmc.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <exception>
#include <random>
#include <sstream>
#include <thread>

#include "sadeepdecs/text_io.hpp"

namespace sadeepdecs {

bool StateSpec::satisfied_by(double probability) const {
  return cmp == Comparison::AtLeast ? probability >= bound : probability <= bound;
}

bool RewardSpec::satisfied_by(double reward) const {
  return cmp == Comparison::AtMost ? reward <= bound : reward >= bound;
}

SpecSet SpecSet::collision_avoidance(double safety_bound, double time_bound) {
  SpecSet s;
  s.states.push_back({"safety", "collision", "done", Comparison::AtLeast, safety_bound});
  s.rewards.push_back({"time", {"done", "collision"}, Comparison::AtMost, time_bound});
  return s;
}

// ---------------------------------------------------------------------------
// Linear algebra

namespace {

std::vector<double> gaussian_elimination(std::vector<double> a, std::vector<double> b, std::size_t n) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    if (std::abs(a[pivot * n + col]) < 1e-14) throw SolverError("singular linear system");
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    const double diag = a[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / diag;
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i * n + c] * x[c];
    x[i] = s / a[i * n + i];
  }
  return x;
}

std::vector<double> gauss_seidel(const std::vector<double>& a, const std::vector<double>& b, std::size_t n) {
  constexpr double kTol = 1e-12;
  constexpr std::size_t kMaxSweeps = 1'000'000;
  std::vector<double> x(n, 0.0);
  for (std::size_t sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double diag = a[i * n + i];
      if (diag == 0.0) throw SolverError("zero diagonal in Gauss-Seidel");
      double s = b[i];
      for (std::size_t c = 0; c < n; ++c)
        if (c != i) s -= a[i * n + c] * x[c];
      const double next = s / diag;
      delta = std::max(delta, std::abs(next - x[i]));
      x[i] = next;
    }
    if (delta < kTol) return x;
  }
  throw SolverError("Gauss-Seidel did not converge");
}

double residual_norm(const std::vector<double>& a, const std::vector<double>& b,
                     const std::vector<double>& x, std::size_t n) {
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = -b[i];
    for (std::size_t c = 0; c < n; ++c) s += a[i * n + c] * x[c];
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

std::vector<std::vector<std::size_t>> predecessors(const Dtmc& chain) {
  std::vector<std::vector<std::size_t>> pred(chain.size());
  for (std::size_t s = 0; s < chain.size(); ++s)
    for (const auto& e : chain.rows[s])
      if (e.prob > 0.0) pred[e.dst].push_back(s);
  return pred;
}

// Backward closure of `seed`, entering a predecessor only if `may_enter` holds.
template <typename Pred>
std::vector<bool> backward_reach(const std::vector<std::vector<std::size_t>>& pred,
                                 const std::vector<bool>& seed, Pred may_enter) {
  std::vector<bool> seen = seed;
  std::deque<std::size_t> queue;
  for (std::size_t s = 0; s < seed.size(); ++s)
    if (seed[s]) queue.push_back(s);
  while (!queue.empty()) {
    const std::size_t s = queue.front();
    queue.pop_front();
    for (std::size_t p : pred[s]) {
      if (!seen[p] && may_enter(p)) {
        seen[p] = true;
        queue.push_back(p);
      }
    }
  }
  return seen;
}

std::vector<bool> label_mask(const Dtmc& chain, std::string_view label) {
  std::vector<bool> mask(chain.size(), false);
  for (std::size_t s : chain.labelled(label)) mask[s] = true;
  return mask;
}

}  // namespace

std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b, std::size_t n,
                                 std::size_t dense_limit) {
  if (a.size() != n * n || b.size() != n) throw std::invalid_argument("solve_linear: shape mismatch");
  if (n == 0) return {};
  if (n <= dense_limit) return gaussian_elimination(std::move(a), std::move(b), n);
  return gauss_seidel(a, b, n);
}

// ---------------------------------------------------------------------------
// Reachability

SolveResult until_values(const Dtmc& chain, std::string_view avoid, std::string_view target) {
  const std::size_t n = chain.size();
  const auto is_avoid = label_mask(chain, avoid);
  const auto is_target = label_mask(chain, target);
  const auto pred = predecessors(chain);

  // prob-0: cannot reach a target through non-avoid states
  const auto can_reach = backward_reach(pred, is_target, [&](std::size_t p) { return !is_avoid[p]; });
  std::vector<bool> no(n);
  for (std::size_t s = 0; s < n; ++s) no[s] = !can_reach[s];
  // prob-1: cannot reach a prob-0 state before hitting a target
  const auto may_fail = backward_reach(pred, no, [&](std::size_t p) { return !is_target[p]; });

  SolveResult result;
  result.values.assign(n, 0.0);
  std::vector<std::size_t> unknown_index(n, SIZE_MAX);
  std::vector<std::size_t> unknowns;
  for (std::size_t s = 0; s < n; ++s) {
    if (!may_fail[s]) {
      result.values[s] = 1.0;
    } else if (!no[s]) {
      unknown_index[s] = unknowns.size();
      unknowns.push_back(s);
    }
  }

  const std::size_t m = unknowns.size();
  result.unknowns = m;
  if (m == 0) return result;
  std::vector<double> a(m * m, 0.0), b(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    a[i * m + i] = 1.0;
    for (const auto& e : chain.rows[unknowns[i]]) {
      if (unknown_index[e.dst] != SIZE_MAX)
        a[i * m + unknown_index[e.dst]] -= e.prob;
      else
        b[i] += e.prob * result.values[e.dst];
    }
  }
  const auto x = solve_linear(a, b, m);
  result.residual = residual_norm(a, b, x, m);
  for (std::size_t i = 0; i < m; ++i) result.values[unknowns[i]] = std::clamp(x[i], 0.0, 1.0);
  return result;
}

double until_probability(const Dtmc& chain, std::string_view avoid, std::string_view target) {
  return until_values(chain, avoid, target).values[chain.initial];
}

SolveResult reward_values(const Dtmc& chain, std::span<const std::string> targets) {
  const std::size_t n = chain.size();
  if (targets.empty()) throw std::invalid_argument("reward_values: no target labels");
  std::vector<bool> is_target(n, false);
  for (const auto& label : targets)
    for (std::size_t s : chain.labelled(label)) is_target[s] = true;
  const auto pred = predecessors(chain);

  const auto can_reach = backward_reach(pred, is_target, [](std::size_t) { return true; });
  std::vector<bool> never(n);
  for (std::size_t s = 0; s < n; ++s) never[s] = !can_reach[s];
  const auto may_miss = backward_reach(pred, never, [&](std::size_t p) { return !is_target[p]; });

  SolveResult result;
  result.values.assign(n, 0.0);
  std::vector<std::size_t> unknown_index(n, SIZE_MAX);
  std::vector<std::size_t> unknowns;
  for (std::size_t s = 0; s < n; ++s) {
    if (is_target[s]) continue;
    if (may_miss[s]) {
      result.values[s] = kInfiniteReward;
    } else {
      unknown_index[s] = unknowns.size();
      unknowns.push_back(s);
    }
  }

  const std::size_t m = unknowns.size();
  result.unknowns = m;
  if (m == 0) return result;
  std::vector<double> a(m * m, 0.0), b(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    a[i * m + i] = 1.0;
    for (const auto& e : chain.rows[unknowns[i]]) {
      b[i] += e.prob * e.reward;
      if (unknown_index[e.dst] != SIZE_MAX) a[i * m + unknown_index[e.dst]] -= e.prob;
    }
  }
  const auto x = solve_linear(a, b, m);
  result.residual = residual_norm(a, b, x, m);
  for (std::size_t i = 0; i < m; ++i) result.values[unknowns[i]] = std::max(0.0, x[i]);
  return result;
}

double expected_reward_to_absorption(const Dtmc& chain, std::span<const std::string> targets) {
  return reward_values(chain, targets).values[chain.initial];
}

// ---------------------------------------------------------------------------
// Monte-Carlo oracle

SimulationResult simulate_chain(const Dtmc& chain, std::string_view avoid, std::string_view target,
                                std::span<const std::string> reward_targets, std::size_t n,
                                std::uint64_t seed, std::size_t step_cap) {
  if (n == 0) throw std::invalid_argument("simulate_chain: need at least one path");
  const auto is_avoid = label_mask(chain, avoid);
  const auto is_target = label_mask(chain, target);
  std::vector<bool> is_reward_target(chain.size(), reward_targets.empty());
  for (const auto& label : reward_targets)
    for (std::size_t s : chain.labelled(label)) is_reward_target[s] = true;
  std::vector<bool> absorbing(chain.size());
  for (std::size_t s = 0; s < chain.size(); ++s) absorbing[s] = chain.is_absorbing(s);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SimulationResult r;
  r.paths = n;
  double sum = 0.0, sum_sq = 0.0;
  std::size_t reached = 0;
  for (std::size_t path = 0; path < n; ++path) {
    std::size_t s = chain.initial;
    int verdict = -1;  // -1 undecided, 0 violated, 1 satisfied
    bool rewarded = false;
    double reward = 0.0;
    std::size_t steps = 0;
    while (true) {
      if (verdict < 0) {
        if (is_target[s]) verdict = 1;
        else if (is_avoid[s]) verdict = 0;
      }
      if (!rewarded && is_reward_target[s]) rewarded = true;
      if ((verdict >= 0 && rewarded) || absorbing[s]) break;
      if (++steps > step_cap) {
        ++r.cap_hits;
        break;
      }
      const double u = unit(rng);
      double acc = 0.0;
      const Edge* chosen = &chain.rows[s].back();
      for (const auto& e : chain.rows[s]) {
        acc += e.prob;
        if (u < acc) {
          chosen = &e;
          break;
        }
      }
      if (!rewarded) reward += chosen->reward;
      s = chosen->dst;
    }
    if (verdict == 1) ++r.successes;
    if (rewarded) {
      ++reached;
      sum += reward;
      sum_sq += reward * reward;
    } else {
      ++r.unreached;
    }
  }
  r.probability = static_cast<double>(r.successes) / static_cast<double>(n);
  if (reached > 0) {
    r.mean_reward = sum / static_cast<double>(reached);
    if (reached > 1)
      r.reward_variance = std::max(0.0, (sum_sq - sum * r.mean_reward) / static_cast<double>(reached - 1));
  }
  if (r.unreached > 0) r.mean_reward = kInfiniteReward;
  return r;
}

// ---------------------------------------------------------------------------
// Candidate quantification

std::string QrTable::to_csv() const {
  std::ostringstream out;
  bool first = true;
  auto cell = [&](const std::string& s) {
    out << (first ? "" : ",") << s;
    first = false;
  };
  for (const auto& n : candidate_names) cell(n);
  for (const auto& n : state_spec_names) cell(n);
  for (const auto& n : reward_spec_names) cell(n);
  out << '\n';
  for (std::size_t i = 0; i < size(); ++i) {
    first = true;
    for (double v : candidates[i].values) cell(format_double(v));
    for (double v : probabilities[i]) cell(format_double(v));
    for (double v : rewards[i]) cell(format_double(v));
    out << '\n';
  }
  return out.str();
}

QrTable quantify_candidates(const Pdtmc& model, const Valuation& fixed, const UncertaintyVector& u,
                            const CandidateGrid& grid, const SpecSet& specs, unsigned workers) {
  if (grid.size() == 0) throw std::invalid_argument("quantify_candidates: empty grid");
  QrTable table;
  table.candidate_names = grid.names;
  table.candidates = grid.candidates;
  for (const auto& s : specs.states) table.state_spec_names.push_back(s.name);
  for (const auto& s : specs.rewards) table.reward_spec_names.push_back(s.name);
  table.probabilities.assign(grid.size(), {});
  table.rewards.assign(grid.size(), {});

  Valuation base = fixed;
  for (const auto& [name, value] : u.as_valuation()) base[name] = value;

  auto evaluate = [&](std::size_t i) {
    try {
      Valuation v = base;
      for (const auto& [name, value] : grid.valuation(i)) v[name] = value;
      const Dtmc chain = instantiate(model, v);
      for (const auto& s : specs.states)
        table.probabilities[i].push_back(until_probability(chain, s.avoid, s.target));
      for (const auto& s : specs.rewards)
        table.rewards[i].push_back(expected_reward_to_absorption(chain, s.targets));
    } catch (const std::exception& e) {
      throw SolverError("candidate " + std::to_string(i) + ": " + e.what());
    }
  };

  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(grid.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) evaluate(i);
    return table;
  }

  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  for (unsigned w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < grid.size(); i += workers) evaluate(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return table;
}

}  // namespace sadeepdecs
