#include "hmmid/likelihood.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hmmid {

namespace {

void check_inputs(const ThetaVector& theta, const Matrix& B, const Vector& pi0,
                  std::span<const int> obs) {
  const int X = theta.num_states;
  if (X < 1) throw std::invalid_argument("likelihood: num_states must be positive");
  if (theta.values.size() != theta.dim())
    throw std::invalid_argument("likelihood: theta has wrong length");
  if (B.rows() != X) throw std::invalid_argument("likelihood: B must have X rows");
  if (pi0.size() != X) throw std::invalid_argument("likelihood: pi0 must have length X");
  if (obs.empty()) throw std::invalid_argument("likelihood: empty observation sequence");
  for (const int y : obs)
    if (y < 0 || y >= B.cols())
      throw std::invalid_argument("likelihood: observation label out of range");
}

[[noreturn]] void throw_zero_probability(size_t step) {
  std::ostringstream os;
  os << "likelihood: observation sequence has zero probability at step " << step;
  throw std::runtime_error(os.str());
}

}  // namespace

int theta_index(int num_states, int i, int j) {
  return i * (num_states - 1) + (j < i ? j : j - 1);
}

ThetaVector theta_from_P(const Matrix& P) {
  const int X = static_cast<int>(P.rows());
  if (P.cols() != X || X < 1) throw std::invalid_argument("theta_from_P: P must be square");
  ThetaVector theta;
  theta.num_states = X;
  theta.values.resize(X * (X - 1));
  for (int i = 0; i < X; ++i)
    for (int j = 0; j < X; ++j)
      if (j != i) theta.values(theta_index(X, i, j)) = P(i, j);
  return theta;
}

Matrix P_from_theta(const ThetaVector& theta) {
  const int X = theta.num_states;
  if (theta.values.size() != theta.dim())
    throw std::invalid_argument("P_from_theta: theta has wrong length");
  Matrix P(X, X);
  for (int i = 0; i < X; ++i) {
    double off_sum = 0.0;
    for (int j = 0; j < X; ++j) {
      if (j == i) continue;
      const double v = theta.values(theta_index(X, i, j));
      if (v < 0.0) {
        std::ostringstream os;
        os << "P_from_theta: negative entry (" << i + 1 << "," << j + 1 << ")";
        throw std::invalid_argument(os.str());
      }
      P(i, j) = v;
      off_sum += v;
    }
    const double diag = 1.0 - off_sum;
    if (diag < 0.0) {
      std::ostringstream os;
      os << "P_from_theta: row " << i + 1 << " free entries sum to " << off_sum
         << " > 1 (negative diagonal)";
      throw std::invalid_argument(os.str());
    }
    P(i, i) = diag;
  }
  return P;
}

double boundary_distance(const ThetaVector& theta) {
  const int X = theta.num_states;
  double dist = std::numeric_limits<double>::infinity();
  for (int i = 0; i < X; ++i) {
    double off_sum = 0.0;
    for (int j = 0; j < X; ++j) {
      if (j == i) continue;
      const double v = theta.values(theta_index(X, i, j));
      dist = std::min(dist, v);
      off_sum += v;
    }
    dist = std::min(dist, 1.0 - off_sum);
  }
  return dist;
}

double log_likelihood(const ThetaVector& theta, const Matrix& B, const Vector& pi0,
                      std::span<const int> obs, PassCounter* counter) {
  check_inputs(theta, B, pi0, obs);
  const Matrix P = P_from_theta(theta);
  const Matrix Pt = P.transpose();

  note_pass(counter);
  Vector phi = pi0.cwiseProduct(B.col(obs[0]));
  double c = phi.sum();
  if (c <= 0.0) throw_zero_probability(0);
  phi /= c;
  long double ll = std::log(c);  // widest native accumulator for the log sum

  Vector next(phi.size());
  for (size_t k = 1; k < obs.size(); ++k) {
    next.noalias() = Pt * phi;
    next.array() *= B.col(obs[k]).array();
    c = next.sum();
    if (c <= 0.0) throw_zero_probability(k);
    phi = next / c;
    ll += std::log(c);
  }
  return static_cast<double>(ll);
}

LikelihoodEvaluation gradient_hessian(const ThetaVector& theta, const Matrix& B,
                                      const Vector& pi0, std::span<const int> obs,
                                      PassCounter* counter) {
  check_inputs(theta, B, pi0, obs);
  const int X = theta.num_states;
  const int d = theta.dim();
  const int npairs = d * (d + 1) / 2;
  const Matrix P = P_from_theta(theta);
  const Matrix Pt = P.transpose();

  // theta entry m corresponds to P(row_of[m], col_of[m]); its derivative
  // dP'/dtheta_m applied to v is (e_col - e_row) * v(row).
  std::vector<int> row_of(d), col_of(d);
  for (int i = 0; i < X; ++i)
    for (int j = 0; j < X; ++j)
      if (j != i) {
        const int m = theta_index(X, i, j);
        row_of[m] = i;
        col_of[m] = j;
      }
  // symmetric pair (m, n), m <= n -> column offset
  std::vector<int> pair_offset(static_cast<size_t>(d) * d, 0);
  {
    int off = 0;
    for (int m = 0; m < d; ++m)
      for (int n = m; n < d; ++n) {
        pair_offset[m * d + n] = off;
        pair_offset[n * d + m] = off;
        ++off;
      }
  }

  // Carriers: [filter | d first-order sensitivities | npairs second-order],
  // all sharing the filter's running normalization.
  const int cols = 1 + d + npairs;
  Matrix carriers = Matrix::Zero(X, cols);
  Matrix next(X, cols);

  LikelihoodEvaluation eval;
  eval.scaling.reserve(obs.size());

  note_pass(counter);
  carriers.col(0) = pi0.cwiseProduct(B.col(obs[0]));
  double c = carriers.col(0).sum();
  if (c <= 0.0) throw_zero_probability(0);
  carriers /= c;
  long double ll = std::log(c);
  eval.scaling.push_back(c);

  for (size_t k = 1; k < obs.size(); ++k) {
    next.noalias() = Pt * carriers;
    for (int m = 0; m < d; ++m) {
      const double vm = carriers(row_of[m], 0);
      next(col_of[m], 1 + m) += vm;
      next(row_of[m], 1 + m) -= vm;
    }
    for (int m = 0; m < d; ++m)
      for (int n = m; n < d; ++n) {
        const int col = 1 + d + pair_offset[m * d + n];
        const double un = carriers(row_of[m], 1 + n);
        next(col_of[m], col) += un;
        next(row_of[m], col) -= un;
        const double um = carriers(row_of[n], 1 + m);
        next(col_of[n], col) += um;
        next(row_of[n], col) -= um;
      }
    next.array().colwise() *= B.col(obs[k]).array();

    c = next.col(0).sum();
    if (c <= 0.0) throw_zero_probability(k);
    carriers = next / c;
    ll += std::log(c);
    eval.scaling.push_back(c);
  }
  eval.loglik = static_cast<double>(ll);

  eval.gradient.resize(d);
  for (int m = 0; m < d; ++m) eval.gradient(m) = carriers.col(1 + m).sum();
  eval.hessian.resize(d, d);
  for (int m = 0; m < d; ++m)
    for (int n = m; n < d; ++n) {
      const double second = carriers.col(1 + d + pair_offset[m * d + n]).sum();
      const double h = second - eval.gradient(m) * eval.gradient(n);
      eval.hessian(m, n) = h;
      eval.hessian(n, m) = h;
    }
  return eval;
}

Vector fd_gradient_of(const std::function<double(const Vector&)>& f, const Vector& at,
                      double h) {
  const int d = static_cast<int>(at.size());
  Vector grad(d);
  Vector point = at;
  for (int m = 0; m < d; ++m) {
    point(m) = at(m) + h;
    const double fp = f(point);
    point(m) = at(m) - h;
    const double fm = f(point);
    point(m) = at(m);
    grad(m) = (fp - fm) / (2.0 * h);
  }
  return grad;
}

Matrix fd_hessian_of(const std::function<double(const Vector&)>& f, const Vector& at,
                     double h) {
  const int d = static_cast<int>(at.size());
  Matrix hess(d, d);
  Vector point = at;
  const double f0 = f(at);
  for (int m = 0; m < d; ++m) {
    point(m) = at(m) + h;
    const double fp = f(point);
    point(m) = at(m) - h;
    const double fm = f(point);
    point(m) = at(m);
    hess(m, m) = (fp - 2.0 * f0 + fm) / (h * h);
  }
  for (int m = 0; m < d; ++m)
    for (int n = m + 1; n < d; ++n) {
      point(m) = at(m) + h;
      point(n) = at(n) + h;
      const double fpp = f(point);
      point(n) = at(n) - h;
      const double fpm = f(point);
      point(m) = at(m) - h;
      const double fmm = f(point);
      point(n) = at(n) + h;
      const double fmp = f(point);
      point(m) = at(m);
      point(n) = at(n);
      const double v = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
      hess(m, n) = v;
      hess(n, m) = v;
    }
  return hess;
}

namespace {

void check_fd_margin(const ThetaVector& theta, double h) {
  if (h <= 0.0) throw std::invalid_argument("fd: step size must be positive");
  const double dist = boundary_distance(theta);
  if (dist < 10.0 * h)
    throw std::invalid_argument("fd: theta too close to the feasible boundary for step h");
}

}  // namespace

Vector fd_gradient(const ThetaVector& theta, const Matrix& B, const Vector& pi0,
                   std::span<const int> obs, double h) {
  check_fd_margin(theta, h);
  auto f = [&](const Vector& v) {
    return log_likelihood(ThetaVector{v, theta.num_states}, B, pi0, obs);
  };
  return fd_gradient_of(f, theta.values, h);
}

Matrix fd_hessian(const ThetaVector& theta, const Matrix& B, const Vector& pi0,
                  std::span<const int> obs, double h) {
  check_fd_margin(theta, h);
  auto f = [&](const Vector& v) {
    return log_likelihood(ThetaVector{v, theta.num_states}, B, pi0, obs);
  };
  return fd_hessian_of(f, theta.values, h);
}

FisherEstimate fisher_estimate(const LikelihoodEvaluation& eval, long num_pairs) {
  if (num_pairs < 1) throw std::invalid_argument("fisher_estimate: need at least one pair");
  FisherEstimate est;
  est.information = -eval.hessian / static_cast<double>(num_pairs);
  if (est.information.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(est.information, Eigen::EigenvaluesOnly);
    est.min_eigenvalue = es.eigenvalues()(0);
    est.positive_definite = est.min_eigenvalue > 0.0;
  }
  return est;
}

}  // namespace hmmid
