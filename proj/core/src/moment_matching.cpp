#include "hmmid/moment_matching.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "hmmid/model.hpp"

namespace hmmid {

namespace {

Matrix kron(const Matrix& A, const Matrix& B) {
  Matrix K(A.rows() * B.rows(), A.cols() * B.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

Vector vec(const Matrix& A) {
  return Eigen::Map<const Vector>(A.data(), A.size());
}

Matrix unvec(const Vector& x, int rows, int cols) {
  return Eigen::Map<const Matrix>(x.data(), rows, cols);
}

}  // namespace

PolytopeBound make_elementwise_bound(Vector lower) {
  if (lower.size() == 0) throw std::invalid_argument("bound: empty vector");
  if (lower.minCoeff() <= 0.0)
    throw std::invalid_argument("bound: l must be strictly positive elementwise");
  if (lower.sum() > 1.0 + kRowSumTol)
    throw std::invalid_argument("bound: 1'l exceeds 1, constraint set empty");
  return PolytopeBound{std::move(lower), std::nullopt};
}

PolytopeBound polytope_from_elementwise_P_bound(const Matrix& L) {
  const int X = static_cast<int>(L.rows());
  if (L.cols() != X || X < 1)
    throw std::invalid_argument("courtois: L must be square");
  if (L.minCoeff() < 0.0)
    throw std::invalid_argument("courtois: L must be nonnegative");

  const Matrix M = Matrix::Identity(X, X) - L.transpose();
  Eigen::FullPivLU<Matrix> lu(M);
  if (!lu.isInvertible())
    throw std::invalid_argument("courtois: I - L^T is singular");
  Matrix V = lu.inverse();

  for (int c = 0; c < X; ++c) {
    const double colsum = V.col(c).sum();
    if (colsum <= 0.0)
      throw std::invalid_argument("courtois: vertex with nonpositive mass");
    V.col(c) /= colsum;
  }

  Vector lower = V.rowwise().minCoeff();
  PolytopeBound bound = make_elementwise_bound(std::move(lower));
  bound.vertices = std::move(V);
  bound.lower_bound_matrix = L;
  return bound;
}

MomentMatrix empirical_moments(std::span<const int> labels, int num_outputs,
                               PassCounter* counter) {
  if (labels.size() < 2)
    throw std::invalid_argument("empirical_moments: need at least 2 observations");
  if (num_outputs < 1) throw std::invalid_argument("empirical_moments: Y must be positive");

  MomentMatrix result;
  result.kind = MomentMatrix::Kind::empirical;
  result.m = Matrix::Zero(num_outputs, num_outputs);

  note_pass(counter);
  for (size_t k = 0; k + 1 < labels.size(); ++k) {
    const int a = labels[k];
    const int b = labels[k + 1];
    if (a < 0 || a >= num_outputs || b < 0 || b >= num_outputs)
      throw std::invalid_argument("empirical_moments: label out of range");
    result.m(a, b) += 1.0;
  }
  result.m /= static_cast<double>(labels.size() - 1);
  return result;
}

MomentMatrix empirical_moments(const ObservationSequence& obs, int num_outputs,
                               PassCounter* counter) {
  return empirical_moments(std::span<const int>(obs.labels), num_outputs, counter);
}

QpProblem assemble_qp(const MomentMatrix& moments, const Matrix& B,
                      const PolytopeBound& bound) {
  const int X = static_cast<int>(B.rows());
  const int Y = static_cast<int>(B.cols());
  if (moments.m.rows() != Y || moments.m.cols() != Y)
    throw std::invalid_argument("assemble_qp: moment matrix must be Y by Y");
  if (bound.lower.size() != X)
    throw std::invalid_argument("assemble_qp: bound must have length X");

  {
    const Eigen::JacobiSVD<Matrix> svd(B);
    if (svd.singularValues().minCoeff() <= kRankTol)
      throw std::invalid_argument("assemble_qp: moment matching not strictly convex "
                                  "(B rank deficient)");
  }

  const int n = X * X;
  const Matrix K = kron(B, B);  // X^2 by Y^2

  QpProblem qp;
  qp.Q = 2.0 * K * K.transpose();
  qp.q = 2.0 * K * vec(moments.m);

  // Equalities: total mass, then X - 1 independent flow-balance rows (the
  // full set of X sums to zero, so the last row is dropped).
  qp.D = Matrix::Zero(X, n);
  qp.d = Vector::Zero(X);
  qp.D.row(0).setOnes();
  qp.d(0) = 1.0;
  for (int i = 0; i + 1 < X; ++i)
    for (int j = 0; j < X; ++j) {
      qp.D(1 + i, i + j * X) += 1.0;  // +A(i, j)
      qp.D(1 + i, j + i * X) -= 1.0;  // -A(j, i)
    }

  // Inequalities: x >= 0, then row sums A 1 >= l.
  qp.G = Matrix::Zero(n + X, n);
  qp.g = Vector::Zero(n + X);
  qp.G.topLeftCorner(n, n) = -Matrix::Identity(n, n);
  for (int i = 0; i < X; ++i) {
    for (int j = 0; j < X; ++j) qp.G(n + i, i + j * X) = -1.0;
    qp.g(n + i) = -bound.lower(i);
  }
  return qp;
}

MomentMatchSolution solve_moment_matching(const MomentMatrix& moments, const Matrix& B,
                                          const PolytopeBound& bound, double tol) {
  const int X = static_cast<int>(B.rows());
  QpProblem qp = assemble_qp(moments, B, bound);

  // Feasible start: A = w w' with w the centered point of the bound simplex.
  Vector w = bound.lower;
  w.array() += (1.0 - bound.lower.sum()) / X;
  const Matrix A0 = w * w.transpose();
  Vector x0 = vec(A0);

  QpSolution sol = solve_qp(qp, tol, 200, x0);
  if (sol.status == QpStatus::infeasible)
    throw std::runtime_error("moment matching: QP infeasible (bound too large)");
  if (sol.status != QpStatus::optimal)
    throw std::runtime_error("moment matching: QP did not converge");

  MomentMatchSolution result;
  result.A = unvec(sol.x, X, X);
  if (result.A.minCoeff() < -10.0 * tol)
    throw std::runtime_error("moment matching: solution violates nonnegativity");
  result.A = result.A.cwiseMax(0.0);  // roundoff-level negatives from the solver
  result.pi_hat = recover_pi(result.A);
  Matrix P = recover_P(result.A);

  double worst = 0.0;
  for (int i = 0; i < X; ++i) {
    const double rs = P.row(i).sum();
    worst = std::max(worst, std::abs(rs - 1.0));
    P.row(i) /= rs;
  }
  if (worst > 1e-6)
    std::cerr << "moment matching: row renormalization absorbed " << worst << "\n";
  result.P_hat = std::move(P);
  result.row_renormalization = worst;
  result.qp = std::move(sol);
  return result;
}

Vector recover_pi(const Matrix& A) {
  if (A.rows() != A.cols() || A.rows() < 1)
    throw std::invalid_argument("recover_pi: A must be square");
  if (A.minCoeff() < 0.0)
    throw std::invalid_argument("recover_pi: A must be nonnegative");
  Vector pi = A.rowwise().sum();
  if (pi.minCoeff() <= 0.0)
    throw std::runtime_error("recover: degenerate stationary mass (zero row sum)");
  return pi;
}

Matrix recover_P(const Matrix& A) {
  const Vector pi = recover_pi(A);
  return pi.cwiseInverse().asDiagonal() * A;
}

double daniel_bound(const Matrix& Q, const Vector& q_true, const Vector& q_hat,
                    const Vector& x_true) {
  if (q_true.size() != q_hat.size() || Q.rows() != q_true.size())
    throw std::invalid_argument("daniel_bound: dimension mismatch");
  const double delta = (q_true - q_hat).norm();
  const double lambda = min_eigenvalue(Q);
  if (lambda <= delta)
    throw std::runtime_error("daniel_bound: perturbation too large for bound");
  return delta / (lambda - delta) * (1.0 + x_true.norm());
}

}  // namespace hmmid
