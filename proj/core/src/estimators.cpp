#include "hmmid/estimators.hpp"

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hmmid {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void fill_qp_diagnostics(EstimationReport& report, const QpSolution& qp) {
  report.qp_objective = qp.objective;
  report.qp_kkt_stationarity = qp.kkt_stationarity;
  report.qp_kkt_feasibility = qp.kkt_feasibility;
  report.qp_kkt_complementarity = qp.kkt_complementarity;
  report.qp_iterations = qp.iterations;
}

}  // namespace

Matrix project_interior(const Matrix& P, double margin) {
  if (P.minCoeff() >= margin) return P;
  const int X = static_cast<int>(P.rows());
  return (1.0 - X * margin) * P + margin * Matrix::Ones(X, P.cols());
}

EstimationReport estimate_mm(std::span<const int> obs, const Matrix& B, const Vector& pi0,
                             const PolytopeBound& bound) {
  (void)pi0;  // the moment route never conditions on the initial distribution
  PassCounter counter;
  EstimationReport report;
  report.method = "MM";

  const auto t_total = Clock::now();
  const auto t_mom = Clock::now();
  const MomentMatrix moments =
      empirical_moments(obs, static_cast<int>(B.cols()), &counter);
  report.seconds_moments = seconds_since(t_mom);

  const auto t_qp = Clock::now();
  MomentMatchSolution mm = solve_moment_matching(moments, B, bound);
  report.seconds_qp = seconds_since(t_qp);

  report.P_hat = std::move(mm.P_hat);
  report.pi_hat = std::move(mm.pi_hat);
  fill_qp_diagnostics(report, mm.qp);
  report.data_passes = counter.passes;
  report.seconds_total = seconds_since(t_total);
  return report;
}

NewtonStepResult newton_step_from_eval(const ThetaVector& theta_init, const Vector& gradient,
                                       const Matrix& hessian,
                                       const RegularizationPolicy& policy) {
  const int d = theta_init.dim();
  if (gradient.size() != d || hessian.rows() != d || hessian.cols() != d)
    throw std::invalid_argument("newton_step: evaluation dimension mismatch");

  NewtonStepResult result;
  result.theta_new = theta_init;
  result.gradient = gradient;
  result.hessian = hessian;
  if (d == 0) {
    result.step = Vector(0);
    return result;
  }

  Eigen::SelfAdjointEigenSolver<Matrix> es(hessian, Eigen::EigenvaluesOnly);
  const double lambda_max = es.eigenvalues()(d - 1);
  double rho = 0.0;
  if (lambda_max > -policy.target) {
    rho = policy.base;
    while (lambda_max - rho > -policy.target) rho *= 2.0;
    result.hessian_negative_definite = false;
  }
  result.regularization = rho;

  // Step QP: minimize 0.5 s'(-H + rho I)s - grad's subject to the entries of
  // P(theta + s) staying nonnegative. s = 0 is always feasible.
  const int X = theta_init.num_states;
  QpProblem qp;
  qp.Q = -hessian + rho * Matrix::Identity(d, d);
  qp.q = gradient;
  qp.G = Matrix::Zero(d + X, d);
  qp.g = Vector::Zero(d + X);
  qp.G.topLeftCorner(d, d) = -Matrix::Identity(d, d);
  qp.g.head(d) = theta_init.values;
  for (int i = 0; i < X; ++i) {
    double off_sum = 0.0;
    for (int j = 0; j < X; ++j) {
      if (j == i) continue;
      qp.G(d + i, theta_index(X, i, j)) = 1.0;
      off_sum += theta_init.values(theta_index(X, i, j));
    }
    qp.g(d + i) = 1.0 - off_sum;
  }
  qp.D = Matrix(0, d);
  qp.d = Vector(0);

  // The Hessian scales with the data size, so the certification tolerance
  // follows the problem scale (1e-10 floor keeps small cases exact).
  const double scale = qp.Q.cwiseAbs().maxCoeff() + qp.q.cwiseAbs().maxCoeff();
  const double tol = std::max(1e-10, 1e-13 * scale);
  QpSolution sol = solve_qp(qp, tol, 400, Vector(Vector::Zero(d)));
  if (sol.status != QpStatus::optimal)
    throw std::runtime_error("newton_step: step QP did not converge");

  result.step = sol.x;
  result.constrained = !sol.active_set.empty();
  result.theta_new.values = theta_init.values + sol.x;

  // Active constraints can leave roundoff-level boundary violations; absorb
  // them so the reconstructed P is a valid stochastic matrix.
  for (int m = 0; m < d; ++m) {
    if (result.theta_new.values(m) < 0.0) {
      if (result.theta_new.values(m) < -1e-8)
        throw std::runtime_error("newton_step: step left the feasible region");
      result.theta_new.values(m) = 0.0;
    }
  }
  for (int i = 0; i < X; ++i) {
    double off_sum = 0.0;
    for (int j = 0; j < X; ++j)
      if (j != i) off_sum += result.theta_new.values(theta_index(X, i, j));
    if (off_sum > 1.0) {
      if (off_sum > 1.0 + 1e-8)
        throw std::runtime_error("newton_step: step left the feasible region");
      for (int j = 0; j < X; ++j)
        if (j != i) result.theta_new.values(theta_index(X, i, j)) /= off_sum;
    }
  }
  return result;
}

NewtonStepResult newton_step(const ThetaVector& theta_init, const Matrix& B,
                             const Vector& pi0, std::span<const int> obs,
                             const RegularizationPolicy& policy, PassCounter* counter) {
  ThetaVector at = theta_init;
  double projection = 0.0;
  if (!theta_is_interior(at, 0.0)) {
    const Matrix original = P_from_theta(at);
    const Matrix projected = project_interior(original, kInteriorProjection);
    projection = (projected - original).cwiseAbs().maxCoeff();
    at = theta_from_P(projected);
  }
  const LikelihoodEvaluation eval = gradient_hessian(at, B, pi0, obs, counter);
  NewtonStepResult result = newton_step_from_eval(at, eval.gradient, eval.hessian, policy);
  result.loglik_at_init = eval.loglik;
  result.boundary_projection = projection;
  return result;
}

EstimationReport estimate_two_step(std::span<const int> obs, const Matrix& B,
                                   const Vector& pi0, const PolytopeBound& bound) {
  PassCounter counter;
  EstimationReport report;
  report.method = "2S";

  const auto t_total = Clock::now();
  const auto t_mom = Clock::now();
  const MomentMatrix moments =
      empirical_moments(obs, static_cast<int>(B.cols()), &counter);
  report.seconds_moments = seconds_since(t_mom);

  const auto t_qp = Clock::now();
  const MomentMatchSolution mm = solve_moment_matching(moments, B, bound);
  report.seconds_qp = seconds_since(t_qp);

  // Pull the moment estimate off the boundary before differentiating.
  const Matrix P_init = project_interior(mm.P_hat, kInteriorProjection);
  report.boundary_projection = (P_init - mm.P_hat).cwiseAbs().maxCoeff();
  const ThetaVector theta_init = theta_from_P(P_init);

  const auto t_newton = Clock::now();
  const LikelihoodEvaluation eval = gradient_hessian(theta_init, B, pi0, obs, &counter);
  NewtonStepResult step = newton_step_from_eval(theta_init, eval.gradient, eval.hessian);
  report.seconds_derivatives = seconds_since(t_newton);

  report.P_hat = P_from_theta(step.theta_new);
  report.pi_hat = mm.pi_hat;
  report.theta_hat = step.theta_new.values;
  report.loglik = eval.loglik;  // at the Newton expansion point
  report.gradient_norm = eval.gradient.norm();
  report.hessian_negative_definite = step.hessian_negative_definite;
  report.regularization = step.regularization;

  const FisherEstimate fisher = fisher_estimate(eval, static_cast<long>(obs.size()) - 1);
  report.fisher = fisher.information;
  report.fisher_positive_definite = fisher.positive_definite;

  fill_qp_diagnostics(report, mm.qp);
  report.data_passes = counter.passes;
  report.seconds_total = seconds_since(t_total);
  return report;
}

namespace {

struct EStepResult {
  double loglik = 0.0;
  Matrix transition_counts;  // expected i -> j transitions
  Vector state_counts;       // expected visits over k = 0..N-1
};

// Scaled forward-backward. The forward sweep caches the filter and the
// emission column of every step, so the backward sweep runs entirely off the
// cache and the E-step costs a single pass over the observations.
EStepResult e_step(std::span<const int> obs, const Matrix& P, const Matrix& B,
                   const Vector& pi0, PassCounter* counter) {
  const int X = static_cast<int>(P.rows());
  const long steps = static_cast<long>(obs.size());
  const Matrix Pt = P.transpose();

  Matrix alpha(X, steps);
  Matrix emis(X, steps);
  Vector scale(steps);

  note_pass(counter);
  emis.col(0) = B.col(obs[0]);
  alpha.col(0) = pi0.cwiseProduct(emis.col(0));
  double c = alpha.col(0).sum();
  if (c <= 0.0) throw std::runtime_error("em: observation has zero probability at step 0");
  alpha.col(0) /= c;
  scale(0) = c;
  long double ll = std::log(c);

  for (long k = 1; k < steps; ++k) {
    emis.col(k) = B.col(obs[k]);
    alpha.col(k).noalias() = Pt * alpha.col(k - 1);
    alpha.col(k).array() *= emis.col(k).array();
    c = alpha.col(k).sum();
    if (c <= 0.0) throw std::runtime_error("em: observation has zero probability");
    alpha.col(k) /= c;
    scale(k) = c;
    ll += std::log(c);
  }

  EStepResult result;
  result.loglik = static_cast<double>(ll);
  result.transition_counts = Matrix::Zero(X, X);
  result.state_counts = Vector::Zero(X);

  Vector beta = Vector::Ones(X);
  Vector weighted(X);
  for (long k = steps - 2; k >= 0; --k) {
    weighted = emis.col(k + 1).cwiseProduct(beta) / scale(k + 1);
    // xi_k = diag(alpha_k) P diag(weighted); gamma_k = alpha_k .* (P weighted)
    result.transition_counts.noalias() +=
        alpha.col(k) * weighted.transpose();  // combined with P below
    const Vector p_weighted = P * weighted;
    result.state_counts += alpha.col(k).cwiseProduct(p_weighted);
    beta = p_weighted;
  }
  result.transition_counts.array() *= P.array();
  return result;
}

}  // namespace

EstimationReport estimate_em(std::span<const int> obs, const Matrix& B, const Vector& pi0,
                             const Matrix& P_init, double tol, int max_iter,
                             const std::string& method_tag) {
  if (obs.size() < 2) throw std::invalid_argument("em: need at least 2 observations");
  const int X = static_cast<int>(B.rows());
  if (P_init.rows() != X || P_init.cols() != X)
    throw std::invalid_argument("em: P_init must be X by X");
  if (P_init.minCoeff() <= 0.0)
    throw std::invalid_argument("em: P_init must be strictly positive");
  if (max_iter < 0) throw std::invalid_argument("em: max_iter must be nonnegative");

  PassCounter counter;
  EstimationReport report;
  report.method = method_tag;

  const auto t_total = Clock::now();
  Matrix P = P_init;
  double prev = -std::numeric_limits<double>::infinity();
  int iterations = 0;

  while (true) {
    const EStepResult stats = e_step(obs, P, B, pi0, &counter);
    report.loglik_trace.push_back(stats.loglik);
    if (stats.loglik - prev < tol) break;
    if (iterations >= max_iter) break;
    prev = stats.loglik;

    if (stats.state_counts.minCoeff() <= 0.0)
      throw std::runtime_error("em: state starved (zero expected visit count)");
    P = stats.state_counts.cwiseInverse().asDiagonal() * stats.transition_counts;
    ++iterations;
  }

  report.P_hat = std::move(P);
  report.theta_hat = theta_from_P(report.P_hat).values;
  report.loglik = report.loglik_trace.back();
  report.iterations = iterations;
  report.data_passes = counter.passes;
  report.seconds_em = seconds_since(t_total);
  report.seconds_total = report.seconds_em;
  return report;
}

Matrix random_transition_init(int num_states, Rng& rng) {
  if (num_states < 1) throw std::invalid_argument("random_transition_init: X must be positive");
  Matrix P(num_states, num_states);
  for (int i = 0; i < num_states; ++i) {
    double sum = 0.0;
    for (int j = 0; j < num_states; ++j) {
      // -log U is Exp(1); normalized rows are flat over the simplex.
      double u = rng.uniform();
      while (u <= 0.0) u = rng.uniform();
      P(i, j) = -std::log(u);
      sum += P(i, j);
    }
    P.row(i) /= sum;
  }
  return P;
}

}  // namespace hmmid
