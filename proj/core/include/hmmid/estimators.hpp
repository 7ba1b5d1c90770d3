#pragma once

#include <optional>
#include <span>
#include <string>

#include "hmmid/likelihood.hpp"
#include "hmmid/moment_matching.hpp"
#include "hmmid/types.hpp"

namespace hmmid {

/// Estimator output shared by every method. Optional fields are filled only
/// where the method computes them without extra passes over the data: the
/// moment-matching report carries no likelihood values (it never evaluates
/// the likelihood), and the two-step report's likelihood quantities refer to
/// the Newton expansion point.
struct EstimationReport {
  std::string method;  // "MM", "2S", "EM", "EM-MM", "EM-True"
  Matrix P_hat;
  std::optional<Vector> pi_hat;
  std::optional<Vector> theta_hat;
  std::optional<double> loglik;
  std::optional<double> gradient_norm;
  bool hessian_negative_definite = true;  // before any regularization (2S)
  std::optional<Matrix> fisher;           // observed-information estimate (2S)
  bool fisher_positive_definite = false;
  double regularization = 0.0;            // rho added as H - rho I (2S)
  double boundary_projection = 0.0;       // interior projection applied to the init (2S)
  int iterations = 0;                     // EM
  std::vector<double> loglik_trace;       // EM, non-decreasing
  long data_passes = 0;

  // wall-clock seconds per phase
  double seconds_moments = 0.0;
  double seconds_qp = 0.0;
  double seconds_derivatives = 0.0;
  double seconds_em = 0.0;
  double seconds_total = 0.0;

  // moment-matching QP diagnostics
  double qp_objective = 0.0;
  double qp_kkt_stationarity = 0.0;
  double qp_kkt_feasibility = 0.0;
  double qp_kkt_complementarity = 0.0;
  int qp_iterations = 0;
};

/// Method-of-moments estimate: one pass for the empirical moments, then the
/// data-size independent QP.
EstimationReport estimate_mm(std::span<const int> obs, const Matrix& B, const Vector& pi0,
                             const PolytopeBound& bound);

/// Hessian regularization schedule for the Newton step: rho = 0 when the
/// Hessian is already negative definite, otherwise the smallest base * 2^k
/// with lambda_max(H - rho I) <= -target.
struct RegularizationPolicy {
  double base = 1e-8;
  double target = 1e-10;
};

struct NewtonStepResult {
  ThetaVector theta_new;
  Vector step;
  double regularization = 0.0;
  bool hessian_negative_definite = true;
  bool constrained = false;          // some nonnegativity constraint went active
  double boundary_projection = 0.0;  // inward projection applied to theta_init
  double loglik_at_init = 0.0;
  Vector gradient;
  Matrix hessian;  // unregularized
};

/// One Newton-Raphson step on the log-likelihood from theta_init, solved as
/// the strictly convex QP in the step so that reconstructed P entries stay
/// nonnegative; reduces to the plain closed-form step when no constraint is
/// active. Computes the gradient and Hessian exactly once (one data pass).
NewtonStepResult newton_step(const ThetaVector& theta_init, const Matrix& B,
                             const Vector& pi0, std::span<const int> obs,
                             const RegularizationPolicy& policy = {},
                             PassCounter* counter = nullptr);

/// The step from an already-computed evaluation; seam for synthetic
/// quadratic objectives in tests.
NewtonStepResult newton_step_from_eval(const ThetaVector& theta_init, const Vector& gradient,
                                       const Matrix& hessian,
                                       const RegularizationPolicy& policy = {});

/// Two-step estimator: moment matching, then a single Newton-Raphson step.
/// Exactly two passes over the data, certified by the report's pass counter.
EstimationReport estimate_two_step(std::span<const int> obs, const Matrix& B,
                                   const Vector& pi0, const PolytopeBound& bound);

/// Baum-Welch with the observation matrix and initial distribution held
/// fixed. Stops when the log-likelihood improvement drops below tol or after
/// max_iter updates; the trace is non-decreasing. method_tag names the arm
/// in the report ("EM", "EM-MM", "EM-True").
EstimationReport estimate_em(std::span<const int> obs, const Matrix& B, const Vector& pi0,
                             const Matrix& P_init, double tol = 1e-6, int max_iter = 500,
                             const std::string& method_tag = "EM");

/// Row-wise flat Dirichlet draw over the simplex interior; the random
/// initializer for the EM baseline.
Matrix random_transition_init(int num_states, Rng& rng);

/// Pulls P off the boundary: (1 - X * margin) * P + margin, guaranteeing
/// every entry is at least margin while keeping rows stochastic. Returns the
/// input unchanged when already interior by that margin.
Matrix project_interior(const Matrix& P, double margin);

inline constexpr double kInteriorProjection = 1e-8;

}  // namespace hmmid
