#pragma once

#include <functional>
#include <span>
#include <vector>

#include "hmmid/types.hpp"

namespace hmmid {

/// Minimal parametrization of a row-stochastic P: row i keeps its off-diagonal
/// entries (in increasing column order) as free parameters and the diagonal is
/// the dependent entry, so d = X(X-1) and the sum-to-one constraint holds by
/// construction.
struct ThetaVector {
  Vector values;       // length X(X-1)
  int num_states = 0;  // X

  int dim() const { return num_states * (num_states - 1); }
};

/// Flat index of P(i, j), j != i, within theta.
int theta_index(int num_states, int i, int j);

ThetaVector theta_from_P(const Matrix& P);

/// Rebuilds P. Throws std::invalid_argument when an entry of theta is
/// negative or a reconstructed diagonal goes negative (message names the
/// offending row).
Matrix P_from_theta(const ThetaVector& theta);

/// Distance from theta to the feasible boundary: the smallest of all free
/// entries and all reconstructed diagonals.
double boundary_distance(const ThetaVector& theta);

inline bool theta_is_interior(const ThetaVector& theta, double margin = 0.0) {
  return boundary_distance(theta) > margin;
}

struct LikelihoodEvaluation {
  double loglik = 0.0;
  Vector gradient;               // length d
  Matrix hessian;                // d by d, symmetric
  std::vector<double> scaling;   // per-step normalization factors c_k
};

/// Log-likelihood of the observations under P(theta) with known B and pi0,
/// via the scaled forward recursion (normalized every step, stable for long
/// sequences). Throws when some step has zero probability, naming the step.
double log_likelihood(const ThetaVector& theta, const Matrix& B, const Vector& pi0,
                      std::span<const int> obs, PassCounter* counter = nullptr);

/// Exact gradient and Hessian of the log-likelihood in one pass, carrying
/// the filter together with its first and second theta-sensitivities under
/// the shared per-step normalization. P is affine in theta, so no second
/// derivative of P enters the recursion.
LikelihoodEvaluation gradient_hessian(const ThetaVector& theta, const Matrix& B,
                                      const Vector& pi0, std::span<const int> obs,
                                      PassCounter* counter = nullptr);

/// Central finite differences of log_likelihood; test/diagnostic oracles.
/// Both guard the step size against the feasible boundary (h must be at most
/// a tenth of the boundary distance).
Vector fd_gradient(const ThetaVector& theta, const Matrix& B, const Vector& pi0,
                   std::span<const int> obs, double h = 1e-6);
Matrix fd_hessian(const ThetaVector& theta, const Matrix& B, const Vector& pi0,
                  std::span<const int> obs, double h = 1e-5);

/// Generic central-difference stencils over an arbitrary scalar function,
/// exposed so tests can calibrate the stencils on known functions.
Vector fd_gradient_of(const std::function<double(const Vector&)>& f, const Vector& at,
                      double h);
Matrix fd_hessian_of(const std::function<double(const Vector&)>& f, const Vector& at,
                     double h);

struct FisherEstimate {
  Matrix information;   // -(1/N) * hessian
  bool positive_definite = false;
  double min_eigenvalue = 0.0;
};

/// Observed-information estimate of the Fisher matrix from an evaluation at
/// (or near) the optimum. Definiteness is reported, not enforced.
FisherEstimate fisher_estimate(const LikelihoodEvaluation& eval, long num_pairs);

}  // namespace hmmid
