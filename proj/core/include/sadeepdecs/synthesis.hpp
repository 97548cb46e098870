#pragma once

#include <cstddef>
#include <string>

#include "sadeepdecs/candidate_grid.hpp"
#include "sadeepdecs/pdtmc.hpp"
#include "sadeepdecs/pmc.hpp"
#include "sadeepdecs/uq.hpp"

namespace sadeepdecs {

/// Maximize state spec `maximize` subject to every reward bound.
struct Objective {
  std::size_t maximize = 0;
};

struct FilterResult {
  std::size_t index = 0;
  Candidate candidate;
  /// The chosen row satisfies every reward bound and every state bound.
  bool feasible = false;
  /// At least one candidate met all reward bounds.
  bool reward_admissible = false;
};

/// Among candidates meeting all reward bounds pick the highest objective
/// probability; ties go to the lower summed expected reward, then to the
/// lexicographically smallest candidate. With no admissible candidate the
/// highest-probability one overall is returned and `feasible` is false.
FilterResult filter_optimal(const CandidateGrid& grid, const QrTable& qr, const SpecSet& specs,
                            const Objective& objective = {});

struct SynthesisResult {
  CandidateGrid grid;
  QrTable table;
  FilterResult choice;

  double objective_value(std::size_t spec = 0) const { return table.probabilities[choice.index][spec]; }
  double reward_value(std::size_t spec = 0) const { return table.rewards[choice.index][spec]; }

  /// Grid table plus a `feasible`/`chosen` column pair.
  std::string report_csv() const;
  /// Single line, e.g. `kappa c1=0.2 c2=0 safety=0.99 time=14.5 feasible=1`.
  std::string chosen_record() const;
};

SynthesisResult synthesize(const UncertaintyVector& u, const Pdtmc& model, const Valuation& fixed,
                           const ParamSpace& space, const SpecSet& specs, unsigned workers = 1);

}  // namespace sadeepdecs
