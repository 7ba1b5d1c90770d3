#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hmmid/moments.hpp"
#include "hmmid/simulate.hpp"
#include "hmmid/stationary.hpp"
#include "test_util.hpp"

using namespace hmmid;

namespace {

HmmModel two_state_model() {
  HmmModel m;
  m.num_states = 2;
  m.num_outputs = 2;
  m.P.resize(2, 2);
  m.P << 0.7, 0.3, 0.4, 0.6;
  m.B.resize(2, 2);
  m.B << 0.8, 0.2, 0.3, 0.7;
  m.pi0.resize(2);
  m.pi0 << 0.5, 0.5;
  return m;
}

}  // namespace

TEST_CASE("identity sensor reduces M_0 to diag(pi0) P") {
  HmmModel m = two_state_model();
  m.B = Matrix::Identity(2, 2);
  m.pi0 << 1.0, 0.0;
  const MomentMatrix M0 = analytic_moments(m, 0);
  Matrix expected(2, 2);
  expected << 0.7, 0.3, 0.0, 0.0;
  CHECK((M0.m - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("fully symmetric model has flat moments for every k") {
  HmmModel m;
  m.num_states = 3;
  m.num_outputs = 3;
  m.P = Matrix::Constant(3, 3, 1.0 / 3.0);
  m.B = Matrix::Constant(3, 3, 1.0 / 3.0);
  m.pi0 = Vector::Constant(3, 1.0 / 3.0);
  for (int k : {0, 1, 5}) {
    const MomentMatrix M = analytic_moments(m, k);
    CHECK((M.m - Matrix::Constant(3, 3, 1.0 / 9.0)).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("lag-3 moments equal the brute-force path enumeration") {
  const HmmModel m = two_state_model();
  const MomentMatrix M3 = analytic_moments(m, 3);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(M3.m(i, j) ==
            doctest::Approx(testutil::pair_probability(m, 3, i, j)).epsilon(1e-13));
}

TEST_CASE("moment entries sum to one at every lag and geometric convergence") {
  Rng rng(5);
  const HmmModel m = testutil::random_model(3, 4, rng);
  const MomentMatrix Minf = analytic_moments_stationary(m);
  CHECK(Minf.m.sum() == doctest::Approx(1.0).epsilon(1e-13));

  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 12; ++k) {
    const MomentMatrix Mk = analytic_moments(m, k);
    CHECK(Mk.m.sum() == doctest::Approx(1.0).epsilon(1e-13));
    const double dist = (Mk.m - Minf.m).norm();
    if (k >= 2) CHECK(dist <= prev + 1e-15);  // geometric decay once mixing starts
    prev = dist;
  }
  CHECK((analytic_moments(m, 40).m - Minf.m).norm() < 1e-10);
}

TEST_CASE("lumped chain of the trivial model is [1]") {
  HmmModel m;
  m.num_states = 1;
  m.num_outputs = 1;
  m.P = Matrix::Ones(1, 1);
  m.B = Matrix::Ones(1, 1);
  m.pi0 = Vector::Ones(1);
  const LumpedChain chain = lumped_chain(m);
  CHECK(chain.size() == 1);
  CHECK(chain.T(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("lumped chain rows are stochastic and assumption1 models mix in two steps") {
  const HmmModel m = two_state_model();
  const LumpedChain chain = lumped_chain(m);
  for (int z = 0; z < chain.size(); ++z)
    CHECK(chain.T.row(z).sum() == doctest::Approx(1.0).epsilon(1e-13));
  const Matrix two_step = chain.T * chain.T;
  CHECK(two_step.minCoeff() > 0.0);  // irreducible and aperiodic
}

TEST_CASE("lumped stationary mass marginalizes to the stationary moments") {
  const HmmModel m = two_state_model();
  const LumpedChain chain = lumped_chain(m);
  const Vector pi_z = stationary_distribution(chain.T);
  const MomentMatrix Minf = analytic_moments_stationary(m);
  for (int i = 0; i < m.num_outputs; ++i)
    for (int j = 0; j < m.num_outputs; ++j) {
      double mass = 0.0;
      for (int l = 0; l < m.num_states; ++l) mass += pi_z(chain.index(i, j, l));
      CHECK(mass == doctest::Approx(Minf.m(i, j)).epsilon(1e-10));
    }
}

TEST_CASE("noiseless pair frequencies converge to diag(pi_inf) P") {
  HmmModel m = two_state_model();
  m.B = Matrix::Identity(2, 2);
  const auto result = sample(m, 100000, 321);
  Matrix freq = Matrix::Zero(2, 2);
  for (size_t k = 0; k + 1 < result.obs.labels.size(); ++k)
    freq(result.obs.labels[k], result.obs.labels[k + 1]) += 1.0;
  freq /= static_cast<double>(result.obs.labels.size() - 1);
  const Vector pi = stationary_distribution(m.P);
  const Matrix expected = pi.asDiagonal() * m.P;
  CHECK((freq - expected).cwiseAbs().maxCoeff() < 0.01);
}
