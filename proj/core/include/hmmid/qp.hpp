#pragma once

#include <optional>
#include <vector>

#include "hmmid/types.hpp"

namespace hmmid {

/// Strictly convex quadratic program
///   minimize 0.5 x'Qx - q'x   subject to   Gx <= g,  Dx = d.
/// Q must be symmetric positive definite; D must have full row rank.
/// Either constraint block may be empty (zero rows).
struct QpProblem {
  Matrix Q;
  Vector q;
  Matrix G;
  Vector g;
  Matrix D;
  Vector d;

  int num_vars() const { return static_cast<int>(Q.rows()); }
};

enum class QpStatus { optimal, infeasible, max_iter };

struct QpSolution {
  QpStatus status = QpStatus::max_iter;
  Vector x;
  double objective = 0.0;
  Vector mu;  // inequality multipliers, >= 0 at an optimum
  Vector nu;  // equality multipliers
  double kkt_stationarity = 0.0;    // ||Qx - q + G'mu + D'nu||_inf
  double kkt_feasibility = 0.0;     // max constraint violation
  double kkt_complementarity = 0.0; // max_i |mu_i (Gx - g)_i|
  double infeasibility = 0.0;       // certificate residual when infeasible
  int iterations = 0;
  std::vector<double> objective_trace;  // value after every iterate update
  std::vector<int> active_set;          // inequality rows active at the end
};

/// Primal active-set solver with a dense KKT subsolver. Ties in the ratio
/// test and in the multiplier drop rule are broken by lowest constraint
/// index. When no feasible x0 is supplied the solver finds one itself
/// (least-norm equality solution, escalating to a big-M elastic program);
/// problems whose elastic stays positive are reported infeasible with the
/// residual as certificate.
QpSolution solve_qp(const QpProblem& problem, double tol = 1e-9, int max_iter = 200,
                    const std::optional<Vector>& x0 = std::nullopt);

/// Smallest eigenvalue of a symmetric matrix (dense symmetric eigensolve).
double min_eigenvalue(const Matrix& Q);

}  // namespace hmmid
