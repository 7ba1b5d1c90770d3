#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hmmid/qp.hpp"
#include "test_util.hpp"

using namespace hmmid;

namespace {

QpProblem unconstrained(const Matrix& Q, const Vector& q) {
  QpProblem p;
  p.Q = Q;
  p.q = q;
  const int n = static_cast<int>(Q.rows());
  p.G = Matrix(0, n);
  p.g = Vector(0);
  p.D = Matrix(0, n);
  p.d = Vector(0);
  return p;
}

// min 0.5 x'Qx - q'x over the probability simplex.
QpProblem simplex_problem(const Matrix& Q, const Vector& q) {
  QpProblem p = unconstrained(Q, q);
  const int n = static_cast<int>(Q.rows());
  p.G = -Matrix::Identity(n, n);
  p.g = Vector::Zero(n);
  p.D = Matrix::Ones(1, n);
  p.d = Vector::Ones(1);
  return p;
}

Matrix random_spd(int n, double lo, double hi, Rng& rng) {
  Matrix A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = 2.0 * rng.uniform() - 1.0;
  const Eigen::HouseholderQR<Matrix> qr(A);
  const Matrix U = qr.householderQ();
  Vector eigs(n);
  for (int i = 0; i < n; ++i) eigs(i) = lo + (hi - lo) * rng.uniform();
  return U * eigs.asDiagonal() * U.transpose();
}

void check_kkt(const QpSolution& sol, double tol) {
  REQUIRE(sol.status == QpStatus::optimal);
  CHECK(sol.kkt_stationarity <= tol);
  CHECK(sol.kkt_feasibility <= tol);
  CHECK(sol.kkt_complementarity <= tol);
  if (sol.mu.size() > 0) CHECK(sol.mu.minCoeff() >= 0.0);
}

}  // namespace

TEST_CASE("unconstrained minimum is Q^{-1} q") {
  Vector q(2);
  q << 1.0, 2.0;
  const QpSolution sol = solve_qp(unconstrained(Matrix::Identity(2, 2), q));
  check_kkt(sol, 1e-9);
  CHECK((sol.x - q).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("projection onto a hyperplane splits evenly") {
  QpProblem p = unconstrained(Matrix::Identity(2, 2), Vector::Zero(2));
  p.D = Matrix::Ones(1, 2);
  p.d = Vector::Ones(1);
  const QpSolution sol = solve_qp(p);
  check_kkt(sol, 1e-9);
  CHECK(sol.x(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sol.x(1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("simplex projection of (0.9, 0.3, -0.2)") {
  Vector v(3);
  v << 0.9, 0.3, -0.2;
  const QpSolution sol = solve_qp(simplex_problem(2.0 * Matrix::Identity(3, 3), 2.0 * v));
  check_kkt(sol, 1e-9);
  Vector expected(3);
  expected << 0.8, 0.2, 0.0;
  CHECK((sol.x - expected).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("simplex projections agree with the sort-based oracle") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 24);
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = 3.0 * (2.0 * rng.uniform() - 1.0);
    const QpSolution sol = solve_qp(simplex_problem(2.0 * Matrix::Identity(n, n), 2.0 * v));
    check_kkt(sol, 1e-9);
    CHECK((sol.x - testutil::project_simplex(v)).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("random SPD simplex problems agree with projected gradient") {
  Rng rng(4242);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 24);
    const Matrix Q = random_spd(n, 0.5, 5.0, rng);
    Vector q(n);
    for (int i = 0; i < n; ++i) q(i) = 2.0 * rng.uniform() - 1.0;
    const QpSolution sol = solve_qp(simplex_problem(Q, q));
    check_kkt(sol, 1e-9);
    const Vector oracle = testutil::projected_gradient_simplex(Q, q, 2000);
    CHECK((sol.x - oracle).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("reported objective equals the Lagrangian dual value") {
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + static_cast<int>(rng.uniform() * 10);
    const Matrix Q = random_spd(n, 0.5, 4.0, rng);
    Vector q(n);
    for (int i = 0; i < n; ++i) q(i) = rng.uniform();
    const QpSolution sol = solve_qp(simplex_problem(Q, q), 1e-9);
    check_kkt(sol, 1e-9);

    // g(mu, nu) = min_x L(x, mu, nu), evaluated at the reported duals.
    const Matrix G = -Matrix::Identity(n, n);
    const Matrix D = Matrix::Ones(1, n);
    const Vector rhs = q - G.transpose() * sol.mu - D.transpose() * sol.nu;
    const Vector xm = Q.ldlt().solve(rhs);
    const double dual = 0.5 * xm.dot(Q * xm) - q.dot(xm) + sol.mu.dot(G * xm) +
                        sol.nu.dot(D * xm - Vector::Ones(1));
    CHECK(std::abs(sol.objective - dual) <= 1e-8);
  }
}

TEST_CASE("solution is invariant under row scaling of equalities") {
  Rng rng(123);
  const int n = 6;
  const Matrix Q = random_spd(n, 0.5, 3.0, rng);
  Vector q(n);
  for (int i = 0; i < n; ++i) q(i) = rng.uniform();
  QpProblem p = simplex_problem(Q, q);
  const QpSolution base = solve_qp(p);

  p.D *= 37.5;
  p.d *= 37.5;
  const QpSolution scaled = solve_qp(p);
  check_kkt(scaled, 1e-8);
  CHECK((base.x - scaled.x).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("objective trace is monotone nonincreasing") {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 8;
    const Matrix Q = random_spd(n, 0.5, 5.0, rng);
    Vector q(n);
    for (int i = 0; i < n; ++i) q(i) = 2.0 * rng.uniform() - 1.0;
    const QpSolution sol = solve_qp(simplex_problem(Q, q));
    check_kkt(sol, 1e-9);
    for (size_t k = 1; k < sol.objective_trace.size(); ++k)
      CHECK(sol.objective_trace[k] <= sol.objective_trace[k - 1] + 1e-10);
  }
}

TEST_CASE("infeasible problems are certified") {
  QpProblem p = unconstrained(Matrix::Identity(2, 2), Vector::Zero(2));
  p.G = Matrix(2, 2);
  p.G << 1.0, 0.0, -1.0, 0.0;  // x0 <= -1 and -x0 <= -1: empty
  p.g = Vector(2);
  p.g << -1.0, -1.0;
  const QpSolution sol = solve_qp(p);
  CHECK(sol.status == QpStatus::infeasible);
  CHECK(sol.infeasibility > 0.1);
}

TEST_CASE("phase 1 finds a start without help") {
  // Simplex problem but solved without the feasible x0 shortcut: the anchor
  // x = D^+ d satisfies the equality but may touch x >= 0 from outside.
  Vector v(4);
  v << -2.0, -1.5, 3.0, -0.5;
  const QpSolution sol = solve_qp(simplex_problem(2.0 * Matrix::Identity(4, 4), 2.0 * v));
  check_kkt(sol, 1e-9);
  CHECK((sol.x - testutil::project_simplex(v)).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("invalid problems are rejected") {
  QpProblem p = unconstrained(Matrix::Identity(2, 2), Vector::Zero(2));
  p.Q(0, 1) = 0.5;  // asymmetric
  CHECK_THROWS_AS(solve_qp(p), std::invalid_argument);

  QpProblem dup = simplex_problem(Matrix::Identity(2, 2), Vector::Zero(2));
  dup.D = Matrix::Ones(2, 2);  // duplicated equality row
  dup.d = Vector::Ones(2);
  CHECK_THROWS_AS(solve_qp(dup), std::invalid_argument);
}

TEST_CASE("min_eigenvalue basics") {
  CHECK(min_eigenvalue(2.0 * Matrix::Identity(3, 3)) == doctest::Approx(2.0).epsilon(1e-12));

  // diag(1, 5) rotated by 45 degrees still has eigenvalues {1, 5}.
  Matrix R(2, 2);
  const double c = std::cos(M_PI / 4.0), s = std::sin(M_PI / 4.0);
  R << c, -s, s, c;
  Matrix Dg = Vector::LinSpaced(2, 1.0, 5.0).asDiagonal();
  CHECK(min_eigenvalue(R * Dg * R.transpose()) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("min_eigenvalue matches inverse power iteration on random SPD") {
  Rng rng(55);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix Q = random_spd(9, 0.3, 6.0, rng);
    const double lib = min_eigenvalue(Q);
    const double oracle = testutil::min_eigenvalue_power(Q);
    CHECK(lib == doctest::Approx(oracle).epsilon(1e-9));
  }
}

TEST_CASE("min_eigenvalue of a 25x25 moment-matching objective") {
  // Q = 2 (B kron B)(B kron B)' for a random 5x5 sensor.
  Rng rng(56);
  const Matrix B = testutil::random_stochastic(5, 5, rng);
  const Matrix K = testutil::kron_loops(B, B);
  const Matrix Q = 2.0 * K * K.transpose();
  const double lib = min_eigenvalue(Q);
  const double oracle = testutil::min_eigenvalue_power(Q, 5000);
  CHECK(std::abs(lib - oracle) <= 1e-10 * std::max(1.0, std::abs(oracle)));
  CHECK(lib > 0.0);
}
