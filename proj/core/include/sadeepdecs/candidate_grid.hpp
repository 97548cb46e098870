#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sadeepdecs/expr.hpp"

namespace sadeepdecs {

struct ParamDimension {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  std::size_t points = 11;
};

/// Box of controller parameters, discretized per dimension.
struct ParamSpace {
  std::vector<ParamDimension> dims;

  /// (c1, c2) in [0, 1]^2 with `points` values each.
  static ParamSpace controller(std::size_t points = 11);
};

/// One point of the grid; values align with the owning grid's dimension names.
struct Candidate {
  std::vector<double> values;
  friend bool operator==(const Candidate&, const Candidate&) = default;
  friend auto operator<=>(const Candidate&, const Candidate&) = default;
};

struct CandidateGrid {
  std::vector<std::string> names;
  std::vector<Candidate> candidates;  // lexicographic, first dimension slowest

  std::size_t size() const { return candidates.size(); }
  Valuation valuation(std::size_t index) const;
};

/// Points a_i + k * (b_i - a_i) / (m_i - 1), k = 0 .. m_i - 1. Rejects
/// m_i < 2 and degenerate or inverted bounds with std::invalid_argument.
CandidateGrid discretize(const ParamSpace& space);

}  // namespace sadeepdecs
