#include "sadeepdecs/synthesis.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "sadeepdecs/text_io.hpp"

namespace sadeepdecs {

ParamSpace ParamSpace::controller(std::size_t points) {
  return ParamSpace{{{"c1", 0.0, 1.0, points}, {"c2", 0.0, 1.0, points}}};
}

Valuation CandidateGrid::valuation(std::size_t index) const {
  const auto& c = candidates.at(index);
  Valuation v;
  for (std::size_t d = 0; d < names.size(); ++d) v[names[d]] = c.values[d];
  return v;
}

CandidateGrid discretize(const ParamSpace& space) {
  if (space.dims.empty()) throw std::invalid_argument("discretize: no dimensions");
  CandidateGrid grid;
  std::vector<std::vector<double>> axes;
  for (const auto& d : space.dims) {
    if (d.points < 2) throw std::invalid_argument("discretize: '" + d.name + "' needs at least 2 points");
    if (!(d.lo < d.hi)) throw std::invalid_argument("discretize: '" + d.name + "' has degenerate bounds");
    const double step = (d.hi - d.lo) / static_cast<double>(d.points - 1);
    std::vector<double> axis(d.points);
    for (std::size_t k = 0; k < d.points; ++k) axis[k] = d.lo + static_cast<double>(k) * step;
    axis.back() = d.hi;
    axes.push_back(std::move(axis));
    grid.names.push_back(d.name);
  }
  std::vector<std::size_t> idx(axes.size(), 0);
  while (true) {
    Candidate c;
    for (std::size_t d = 0; d < axes.size(); ++d) c.values.push_back(axes[d][idx[d]]);
    grid.candidates.push_back(std::move(c));
    std::size_t d = axes.size();
    while (d > 0) {
      --d;
      if (++idx[d] < axes[d].size()) break;
      idx[d] = 0;
      if (d == 0) return grid;
    }
  }
}

FilterResult filter_optimal(const CandidateGrid& grid, const QrTable& qr, const SpecSet& specs,
                            const Objective& objective) {
  if (qr.size() != grid.size() || qr.probabilities.size() != grid.size() ||
      qr.rewards.size() != grid.size())
    throw std::invalid_argument("filter_optimal: QR table does not align with the grid");
  if (grid.size() == 0) throw std::invalid_argument("filter_optimal: empty grid");
  if (objective.maximize >= specs.states.size())
    throw std::invalid_argument("filter_optimal: objective refers to a missing state spec");
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (qr.candidates[i] != grid.candidates[i] || qr.probabilities[i].size() != specs.states.size() ||
        qr.rewards[i].size() != specs.rewards.size())
      throw std::invalid_argument("filter_optimal: row " + std::to_string(i) + " is misaligned");

  auto admissible = [&](std::size_t i) {
    for (std::size_t r = 0; r < specs.rewards.size(); ++r)
      if (!specs.rewards[r].satisfied_by(qr.rewards[i][r])) return false;
    return true;
  };
  auto reward_sum = [&](std::size_t i) {
    return std::accumulate(qr.rewards[i].begin(), qr.rewards[i].end(), 0.0);
  };
  // strict "i better than j"
  auto better = [&](std::size_t i, std::size_t j) {
    const double pi = qr.probabilities[i][objective.maximize];
    const double pj = qr.probabilities[j][objective.maximize];
    if (pi != pj) return pi > pj;
    const double ri = reward_sum(i), rj = reward_sum(j);
    if (ri != rj) return ri < rj;
    return grid.candidates[i] < grid.candidates[j];
  };

  std::optional<std::size_t> best_admissible, best_overall;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!best_overall || better(i, *best_overall)) best_overall = i;
    if (admissible(i) && (!best_admissible || better(i, *best_admissible))) best_admissible = i;
  }

  FilterResult result;
  result.reward_admissible = best_admissible.has_value();
  result.index = best_admissible ? *best_admissible : *best_overall;
  result.candidate = grid.candidates[result.index];
  result.feasible = result.reward_admissible;
  for (std::size_t s = 0; s < specs.states.size(); ++s)
    if (!specs.states[s].satisfied_by(qr.probabilities[result.index][s])) result.feasible = false;
  return result;
}

std::string SynthesisResult::report_csv() const {
  std::istringstream in(table.to_csv());
  std::ostringstream out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (row == 0) {
      out << line << ",chosen,feasible\n";
    } else {
      const bool chosen = row - 1 == choice.index;
      out << line << ',' << (chosen ? 1 : 0) << ',' << (chosen && choice.feasible ? 1 : 0) << '\n';
    }
    ++row;
  }
  return out.str();
}

std::string SynthesisResult::chosen_record() const {
  std::ostringstream out;
  out << "kappa";
  for (std::size_t d = 0; d < grid.names.size(); ++d)
    out << ' ' << grid.names[d] << '=' << format_double(choice.candidate.values[d]);
  for (std::size_t s = 0; s < table.state_spec_names.size(); ++s)
    out << ' ' << table.state_spec_names[s] << '=' << format_double(table.probabilities[choice.index][s]);
  for (std::size_t s = 0; s < table.reward_spec_names.size(); ++s)
    out << ' ' << table.reward_spec_names[s] << '=' << format_double(table.rewards[choice.index][s]);
  out << " feasible=" << (choice.feasible ? 1 : 0);
  return out.str();
}

SynthesisResult synthesize(const UncertaintyVector& u, const Pdtmc& model, const Valuation& fixed,
                           const ParamSpace& space, const SpecSet& specs, unsigned workers) {
  SynthesisResult result;
  result.grid = discretize(space);
  result.table = quantify_candidates(model, fixed, u, result.grid, specs, workers);
  result.choice = filter_optimal(result.grid, result.table, specs);
  return result;
}

}  // namespace sadeepdecs
