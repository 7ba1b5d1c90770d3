#pragma once

#include <string>
#include <vector>

#include "hmmid/types.hpp"

namespace hmmid {

/// Finite hidden Markov model with X states and Y output labels.
///
/// P (X by X) and B (X by Y) are row-stochastic; pi0 is the initial state
/// distribution. Labels and states are 0-based everywhere in the library;
/// file and CLI I/O converts to 1-based.
struct HmmModel {
  int num_states = 0;   // X
  int num_outputs = 0;  // Y
  Matrix P;             // transition probabilities
  Matrix B;             // observation probabilities
  Vector pi0;           // initial distribution
};

/// A sequence of output labels y_0, ..., y_N (N + 1 labels, N pairs).
struct ObservationSequence {
  std::vector<int> labels;
  long num_pairs() const { return static_cast<long>(labels.size()) - 1; }
};

enum class ValidationLevel { structural, assumption1 };

struct ValidationReport {
  bool structural_ok = true;
  bool assumption1_ok = true;  // meaningful only when that level was checked
  std::vector<std::string> failures;

  bool ok(ValidationLevel level) const {
    return level == ValidationLevel::structural ? structural_ok
                                                : structural_ok && assumption1_ok;
  }
};

inline constexpr double kRowSumTol = 1e-12;
inline constexpr double kRankTol = 1e-10;

/// Checks model invariants and lists every failure instead of stopping at
/// the first. The structural level covers nonnegativity and row sums; the
/// assumption1 level additionally requires P > 0, B > 0 and rank(B) = X
/// (smallest singular value above kRankTol). Dimension mismatches between
/// the declared sizes and the matrices throw std::invalid_argument.
ValidationReport validate_model(const HmmModel& model, ValidationLevel level);

}  // namespace hmmid
