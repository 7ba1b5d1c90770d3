#include "hmmid/qp.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hmmid {

namespace {

constexpr double kZeroStepTol = 1e-11;
constexpr double kDropTol = -1e-11;

void check_problem(const QpProblem& p) {
  const int n = p.num_vars();
  if (n < 1 || p.Q.cols() != n) throw std::invalid_argument("qp: Q must be square");
  if (p.q.size() != n) throw std::invalid_argument("qp: q has wrong size");
  if (p.G.rows() != p.g.size() || (p.G.rows() > 0 && p.G.cols() != n))
    throw std::invalid_argument("qp: inequality block dimensions inconsistent");
  if (p.D.rows() != p.d.size() || (p.D.rows() > 0 && p.D.cols() != n))
    throw std::invalid_argument("qp: equality block dimensions inconsistent");

  const double scale = std::max(1.0, p.Q.cwiseAbs().maxCoeff());
  if ((p.Q - p.Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("qp: Q is not symmetric");

  if (p.D.rows() > 0) {
    Eigen::ColPivHouseholderQR<Matrix> qr(p.D.transpose());
    qr.setThreshold(1e-12);
    if (qr.rank() < p.D.rows())
      throw std::invalid_argument("qp: equality constraints not full row rank");
  }
}

double objective_value(const QpProblem& p, const Vector& x) {
  return 0.5 * x.dot(p.Q * x) - p.q.dot(x);
}

// Equality-constrained subproblem at x restricted to the rows of D plus the
// working inequality set: minimize the quadratic over C p = 0. Returns the
// step p and the multipliers [nu; mu_W]. One round of iterative refinement
// keeps the residuals near machine precision.
void kkt_step(const QpProblem& p, const Vector& x, const std::vector<int>& working,
              Vector& step, Vector& duals) {
  const int n = p.num_vars();
  const int me = static_cast<int>(p.D.rows());
  const int mw = static_cast<int>(working.size());
  const int m = me + mw;

  if (m == 0) {
    const Vector rhs = p.q - p.Q * x;
    Eigen::PartialPivLU<Matrix> lu(p.Q);
    step = lu.solve(rhs);
    step += lu.solve(rhs - p.Q * step);
    duals.resize(0);
    return;
  }

  Matrix K = Matrix::Zero(n + m, n + m);
  K.topLeftCorner(n, n) = p.Q;
  if (me > 0) {
    K.block(0, n, n, me) = p.D.transpose();
    K.block(n, 0, me, n) = p.D;
  }
  for (int k = 0; k < mw; ++k) {
    K.block(0, n + me + k, n, 1) = p.G.row(working[k]).transpose();
    K.block(n + me + k, 0, 1, n) = p.G.row(working[k]);
  }

  Vector rhs = Vector::Zero(n + m);
  rhs.head(n) = p.q - p.Q * x;

  Eigen::PartialPivLU<Matrix> lu(K);
  Vector z = lu.solve(rhs);
  z += lu.solve(rhs - K * z);

  step = z.head(n);
  duals = z.tail(m);
}

void fill_kkt_residuals(const QpProblem& p, QpSolution& sol) {
  const int mi = static_cast<int>(p.G.rows());
  const int me = static_cast<int>(p.D.rows());

  Vector r = p.Q * sol.x - p.q;
  if (mi > 0) r += p.G.transpose() * sol.mu;
  if (me > 0) r += p.D.transpose() * sol.nu;
  sol.kkt_stationarity = r.cwiseAbs().maxCoeff();

  double feas = 0.0;
  double comp = 0.0;
  if (mi > 0) {
    const Vector slack = p.G * sol.x - p.g;
    feas = std::max(feas, slack.maxCoeff());
    comp = (sol.mu.array() * slack.array()).abs().maxCoeff();
  }
  if (me > 0) feas = std::max(feas, (p.D * sol.x - p.d).cwiseAbs().maxCoeff());
  sol.kkt_feasibility = std::max(0.0, feas);
  sol.kkt_complementarity = comp;
  sol.objective = objective_value(p, sol.x);
}

// Core loop. Assumes x is feasible (up to roundoff-level slack).
QpSolution primal_active_set(const QpProblem& p, Vector x, double tol, int max_iter) {
  const int n = p.num_vars();
  const int mi = static_cast<int>(p.G.rows());
  const int me = static_cast<int>(p.D.rows());

  QpSolution sol;
  sol.x = std::move(x);
  sol.mu = Vector::Zero(mi);
  sol.nu = Vector::Zero(me);
  sol.objective_trace.push_back(objective_value(p, sol.x));

  std::vector<int> working;
  std::vector<char> in_working(static_cast<size_t>(mi), 0);
  Vector step, duals;

  for (int iter = 0; iter < max_iter; ++iter) {
    sol.iterations = iter + 1;
    kkt_step(p, sol.x, working, step, duals);

    const double step_size = step.size() > 0 ? step.cwiseAbs().maxCoeff() : 0.0;
    const double x_scale = 1.0 + sol.x.cwiseAbs().maxCoeff();

    if (step_size <= kZeroStepTol * x_scale) {
      // Stationary on the working set; check multiplier signs.
      int drop = -1;
      double most_negative = kDropTol;
      for (int k = 0; k < static_cast<int>(working.size()); ++k) {
        const double m = duals(me + k);
        if (m < most_negative) {
          most_negative = m;
          drop = k;
        } else if (drop >= 0 && m == most_negative && working[k] < working[drop]) {
          drop = k;
        }
      }
      if (drop < 0) {
        sol.mu.setZero();
        for (int k = 0; k < static_cast<int>(working.size()); ++k)
          sol.mu(working[k]) = std::max(0.0, duals(me + k));
        sol.nu = me > 0 ? Vector(duals.head(me)) : Vector();
        sol.active_set = working;
        fill_kkt_residuals(p, sol);
        // optimal status certifies the residuals
        const bool certified = sol.kkt_stationarity <= tol &&
                               sol.kkt_feasibility <= tol &&
                               sol.kkt_complementarity <= tol;
        sol.status = certified ? QpStatus::optimal : QpStatus::max_iter;
        return sol;
      }
      in_working[working[drop]] = 0;
      working.erase(working.begin() + drop);
      continue;
    }

    // Ratio test against constraints outside the working set.
    double alpha = 1.0;
    int blocking = -1;
    if (mi > 0) {
      const Vector gp = p.G * step;
      const Vector slack = p.g - p.G * sol.x;
      for (int i = 0; i < mi; ++i) {
        if (in_working[i]) continue;
        if (gp(i) > 1e-13 * (1.0 + std::abs(slack(i)))) {
          const double a = std::max(0.0, slack(i) / gp(i));
          if (a < alpha) {
            alpha = a;
            blocking = i;
          }
        }
      }
    }

    sol.x += alpha * step;
    sol.objective_trace.push_back(objective_value(p, sol.x));
    if (blocking >= 0) {
      working.push_back(blocking);
      in_working[blocking] = 1;
      std::sort(working.begin(), working.end());
    }
  }

  // Iteration budget exhausted: report the best iterate honestly.
  sol.status = QpStatus::max_iter;
  sol.active_set = working;
  fill_kkt_residuals(p, sol);
  return sol;
}

double max_violation(const QpProblem& p, const Vector& x) {
  double v = 0.0;
  if (p.G.rows() > 0) v = std::max(v, (p.G * x - p.g).maxCoeff());
  if (p.D.rows() > 0) v = std::max(v, (p.D * x - p.d).cwiseAbs().maxCoeff());
  return v;
}

// Least-norm solution of Dx = d (zero vector when there are no equalities).
Vector equality_anchor(const QpProblem& p) {
  const int n = p.num_vars();
  if (p.D.rows() == 0) return Vector::Zero(n);
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(p.D);
  return cod.solve(p.d);
}

// Big-M elastic: one extra variable t bounds every inequality violation.
// With M large enough the constraint t >= 0 goes active and the x-block of
// the optimum solves the original problem exactly.
QpSolution solve_via_elastic(const QpProblem& p, const Vector& xe, double tol,
                             int max_iter) {
  const int n = p.num_vars();
  const int mi = static_cast<int>(p.G.rows());
  const int me = static_cast<int>(p.D.rows());

  QpProblem aug;
  aug.Q = Matrix::Zero(n + 1, n + 1);
  aug.Q.topLeftCorner(n, n) = p.Q;
  aug.Q(n, n) = std::max(1.0, p.Q.diagonal().mean());
  aug.G = Matrix::Zero(mi + 1, n + 1);
  aug.G.topLeftCorner(mi, n) = p.G;
  aug.G.col(n).head(mi).setConstant(-1.0);
  aug.G(mi, n) = -1.0;
  aug.g = Vector::Zero(mi + 1);
  aug.g.head(mi) = p.g;
  if (me > 0) {
    aug.D = Matrix::Zero(me, n + 1);
    aug.D.topLeftCorner(me, n) = p.D;
    aug.d = p.d;
  } else {
    aug.D = Matrix(0, n + 1);
    aug.d = Vector(0);
  }

  const double t0 = std::max(0.0, (p.G * xe - p.g).maxCoeff());
  double penalty = 1e4 * (1.0 + p.q.cwiseAbs().maxCoeff() +
                          p.Q.cwiseAbs().maxCoeff() * (1.0 + xe.cwiseAbs().maxCoeff()));

  QpSolution last;
  for (int attempt = 0; attempt < 4; ++attempt) {
    aug.q = Vector::Zero(n + 1);
    aug.q.head(n) = p.q;
    aug.q(n) = -penalty;

    Vector z0(n + 1);
    z0.head(n) = xe;
    z0(n) = t0;
    QpSolution aug_sol = primal_active_set(aug, z0, tol, std::max(max_iter, 4 * (n + mi)));
    const double t_hat = aug_sol.x(n);

    if (aug_sol.status != QpStatus::max_iter && t_hat <= tol) {
      QpSolution sol;
      sol.status = QpStatus::optimal;
      sol.x = aug_sol.x.head(n);
      sol.mu = aug_sol.mu.head(mi);
      sol.nu = aug_sol.nu;
      sol.iterations = aug_sol.iterations;
      sol.objective_trace = std::move(aug_sol.objective_trace);
      for (int i : aug_sol.active_set)
        if (i < mi) sol.active_set.push_back(i);
      fill_kkt_residuals(p, sol);
      if (sol.kkt_feasibility <= tol && sol.kkt_stationarity <= tol &&
          sol.kkt_complementarity <= tol)
        return sol;
    }
    last = aug_sol;
    penalty *= 100.0;
  }

  QpSolution sol;
  sol.status = QpStatus::infeasible;
  sol.x = last.x.head(n);
  sol.mu = Vector::Zero(mi);
  sol.nu = Vector::Zero(me);
  sol.iterations = last.iterations;
  sol.infeasibility = std::max(last.x(n), max_violation(p, sol.x));
  fill_kkt_residuals(p, sol);
  return sol;
}

}  // namespace

QpSolution solve_qp(const QpProblem& problem, double tol, int max_iter,
                    const std::optional<Vector>& x0) {
  check_problem(problem);
  const int n = problem.num_vars();

  if (x0.has_value()) {
    if (x0->size() != n) throw std::invalid_argument("qp: x0 has wrong size");
    if (max_violation(problem, *x0) <= 0.1 * tol)
      return primal_active_set(problem, *x0, tol, max_iter);
  }

  Vector xe = equality_anchor(problem);
  if (problem.D.rows() > 0 &&
      (problem.D * xe - problem.d).cwiseAbs().maxCoeff() > tol) {
    QpSolution sol;  // inconsistent equalities (unreachable when D has full row rank)
    sol.status = QpStatus::infeasible;
    sol.x = xe;
    sol.mu = Vector::Zero(problem.G.rows());
    sol.nu = Vector::Zero(problem.D.rows());
    sol.infeasibility = (problem.D * xe - problem.d).cwiseAbs().maxCoeff();
    fill_kkt_residuals(problem, sol);
    return sol;
  }

  if (problem.G.rows() == 0 || (problem.G * xe - problem.g).maxCoeff() <= 0.1 * tol)
    return primal_active_set(problem, xe, tol, max_iter);

  return solve_via_elastic(problem, xe, tol, max_iter);
}

double min_eigenvalue(const Matrix& Q) {
  if (Q.rows() != Q.cols() || Q.rows() < 1)
    throw std::invalid_argument("min_eigenvalue: matrix must be square");
  Eigen::SelfAdjointEigenSolver<Matrix> es(Q, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("min_eigenvalue: eigensolve failed");
  return es.eigenvalues()(0);
}

}  // namespace hmmid
