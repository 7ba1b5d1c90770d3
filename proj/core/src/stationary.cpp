#include "hmmid/stationary.hpp"

#include <Eigen/QR>
#include <stdexcept>

namespace hmmid {

Vector stationary_distribution(const Matrix& P) {
  const int X = static_cast<int>(P.rows());
  if (P.cols() != X || X < 1) throw std::invalid_argument("stationary: P must be square");

  // Stacked system [(P^T - I); 1^T] pi = [0; 1]. Rank X iff the stationary
  // distribution is unique.
  Matrix M(X + 1, X);
  M.topRows(X) = P.transpose() - Matrix::Identity(X, X);
  M.bottomRows(1).setOnes();
  Vector rhs = Vector::Zero(X + 1);
  rhs(X) = 1.0;

  Eigen::ColPivHouseholderQR<Matrix> qr(M);
  qr.setThreshold(1e-10);
  if (qr.rank() < X)
    throw std::runtime_error("stationary: no unique stationary distribution");

  Vector pi = qr.solve(rhs);
  const double sum = pi.sum();
  if (sum <= 0.0)
    throw std::runtime_error("stationary: no unique stationary distribution");
  pi /= sum;

  const double residual = (P.transpose() * pi - pi).cwiseAbs().maxCoeff();
  if (residual > 1e-12)
    throw std::runtime_error("stationary: no unique stationary distribution");
  return pi;
}

}  // namespace hmmid
