#pragma once

#include <optional>
#include <span>

#include "hmmid/moments.hpp"
#include "hmmid/qp.hpp"
#include "hmmid/types.hpp"

namespace hmmid {

/// Elementwise lower bound l > 0 on the stationary distribution, with
/// 1'l <= 1 so that the constrained problem stays feasible. When the bound
/// was derived from a lower-bound matrix on P, the polyhedron vertices are
/// kept for diagnostics.
struct PolytopeBound {
  Vector lower;
  std::optional<Matrix> vertices;            // columns are vertices, when derived
  std::optional<Matrix> lower_bound_matrix;  // the L the vertices came from
};

/// Validates l > 0 elementwise and 1'l <= 1; throws std::invalid_argument
/// otherwise (an all-zero bound is rejected as uninformative).
PolytopeBound make_elementwise_bound(Vector lower);

/// Bound derived from an elementwise lower bound L on P: the vertices are
/// the normalized columns of (I - L^T)^{-1} and l is their componentwise
/// minimum. Throws when I - L^T is singular or the resulting bound violates
/// the PolytopeBound invariants.
PolytopeBound polytope_from_elementwise_P_bound(const Matrix& L);

/// Empirical pair frequencies: entry (i, j) counts transitions y_k = i,
/// y_{k+1} = j over one pass, divided by the number of pairs.
MomentMatrix empirical_moments(std::span<const int> labels, int num_outputs,
                               PassCounter* counter = nullptr);
MomentMatrix empirical_moments(const ObservationSequence& obs, int num_outputs,
                               PassCounter* counter = nullptr);

/// Standard-form QP over x = vec(A) (column-major) for the moment-matching
/// problem: Q = 2 (B kron B)(B kron B)', q = 2 (B kron B) vec(Mhat), with
/// equalities 1'x = 1 plus X-1 independent flow-balance rows of
/// (A - A')1 = 0, and inequalities x >= 0, A1 >= l. Throws when B is
/// rank deficient (objective no longer strictly convex).
QpProblem assemble_qp(const MomentMatrix& moments, const Matrix& B,
                      const PolytopeBound& bound);

struct MomentMatchSolution {
  Matrix A;        // X by X, the QP variable reshaped
  Vector pi_hat;   // A 1
  Matrix P_hat;    // diag(A 1)^{-1} A with rows renormalized
  QpSolution qp;   // objective, KKT residuals, iteration count
  double row_renormalization = 0.0;  // largest |row sum - 1| absorbed
};

/// Solves the moment-matching QP and recovers (pi, P) from A.
MomentMatchSolution solve_moment_matching(const MomentMatrix& moments, const Matrix& B,
                                          const PolytopeBound& bound, double tol = 1e-9);

/// pi = A 1. Throws on a zero row sum ("degenerate stationary mass").
Vector recover_pi(const Matrix& A);

/// P = diag(A 1)^{-1} A. Same degeneracy error as recover_pi.
Matrix recover_P(const Matrix& A);

/// Perturbation diagnostic for the QP solution displacement under a change
/// of the linear term: delta / (lambda_min(Q) - delta) * (1 + ||x_true||_2)
/// with delta = ||q_true - q_hat||_2. Requires lambda_min(Q) > delta.
double daniel_bound(const Matrix& Q, const Vector& q_true, const Vector& q_hat,
                    const Vector& x_true);

}  // namespace hmmid
