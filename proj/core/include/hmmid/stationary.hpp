#pragma once

#include "hmmid/types.hpp"

namespace hmmid {

/// Stationary distribution of a row-stochastic matrix P, computed by the
/// least-squares solve of the stacked system [(P^T - I); 1^T] pi = [0; 1]
/// followed by exact renormalization. Throws std::runtime_error when the
/// chain has no unique stationary distribution (rank deficiency beyond
/// tolerance) or the residual ||P^T pi - pi||_inf exceeds 1e-12.
Vector stationary_distribution(const Matrix& P);

}  // namespace hmmid
