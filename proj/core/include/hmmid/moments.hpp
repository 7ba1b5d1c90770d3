#pragma once

#include "hmmid/model.hpp"
#include "hmmid/types.hpp"

namespace hmmid {

/// Y by Y joint-probability (or empirical frequency) matrix of consecutive
/// observation pairs: entry (i, j) is Pr(y_k = i, y_{k+1} = j).
struct MomentMatrix {
  enum class Kind { analytic, analytic_stationary, empirical };
  Matrix m;
  Kind kind = Kind::analytic;
  int lag = 0;  // k for Kind::analytic
};

/// M_k = B^T diag((P^T)^k pi0) P B.
MomentMatrix analytic_moments(const HmmModel& model, int k);

/// Stationary limit: B^T diag(pi_inf) P B.
MomentMatrix analytic_moments_stationary(const HmmModel& model);

/// Markov chain on the triples z_k = (y_k, y_{k+1}, x_{k+1}), enumerated
/// lexicographically with i = y_k fastest, then j = y_{k+1}, then
/// l = x_{k+1}. Serves as an independent oracle for ergodic-average
/// properties of observation pairs.
struct LumpedChain {
  int num_outputs = 0;  // Y
  int num_states = 0;   // X
  Matrix T;             // Z by Z with Z = Y*Y*X, row-stochastic

  int index(int i, int j, int l) const {
    return i + num_outputs * (j + num_outputs * l);
  }
  int size() const { return num_outputs * num_outputs * num_states; }
};

/// T[(i,j,l) -> (i',j',l')] = 1{i' = j} * P(l, l') * B(l', j').
LumpedChain lumped_chain(const HmmModel& model);

}  // namespace hmmid
