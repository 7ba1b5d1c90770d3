#include "hmmid/model.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hmmid {

namespace {

void check_row_stochastic(const Matrix& m, const std::string& name,
                          std::vector<std::string>& failures) {
  for (int i = 0; i < m.rows(); ++i) {
    double sum = 0.0;
    for (int j = 0; j < m.cols(); ++j) {
      if (m(i, j) < 0.0) {
        std::ostringstream os;
        os << name << " entry (" << i + 1 << "," << j + 1 << ") negative: " << m(i, j);
        failures.push_back(os.str());
      }
      sum += m(i, j);
    }
    if (std::abs(sum - 1.0) > kRowSumTol) {
      std::ostringstream os;
      os << name << " row " << i + 1 << " sum " << sum;
      failures.push_back(os.str());
    }
  }
}

void check_positive(const Matrix& m, const std::string& name,
                    std::vector<std::string>& failures) {
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (m(i, j) <= 0.0) {
        std::ostringstream os;
        os << name << " entry (" << i + 1 << "," << j + 1 << ") not strictly positive";
        failures.push_back(os.str());
        return;  // one witness per matrix is enough for the report
      }
}

}  // namespace

ValidationReport validate_model(const HmmModel& model, ValidationLevel level) {
  const int X = model.num_states;
  const int Y = model.num_outputs;
  if (X <= 0 || Y <= 0) throw std::invalid_argument("model: X and Y must be positive");
  if (model.P.rows() != X || model.P.cols() != X)
    throw std::invalid_argument("model: P must be X by X");
  if (model.B.rows() != X || model.B.cols() != Y)
    throw std::invalid_argument("model: B must be X by Y");
  if (model.pi0.size() != X)
    throw std::invalid_argument("model: pi0 must have length X");

  ValidationReport report;
  std::vector<std::string> structural;
  check_row_stochastic(model.P, "P", structural);
  check_row_stochastic(model.B, "B", structural);

  double pi_sum = 0.0;
  for (int i = 0; i < X; ++i) {
    if (model.pi0(i) < 0.0) {
      std::ostringstream os;
      os << "pi0 entry " << i + 1 << " negative: " << model.pi0(i);
      structural.push_back(os.str());
    }
    pi_sum += model.pi0(i);
  }
  if (std::abs(pi_sum - 1.0) > kRowSumTol) {
    std::ostringstream os;
    os << "pi0 sum " << pi_sum;
    structural.push_back(os.str());
  }

  report.structural_ok = structural.empty();
  report.failures = std::move(structural);

  if (level == ValidationLevel::assumption1) {
    std::vector<std::string> a1;
    check_positive(model.P, "P", a1);
    check_positive(model.B, "B", a1);
    const Eigen::JacobiSVD<Matrix> svd(model.B);
    const double smin = svd.singularValues().minCoeff();
    if (smin <= kRankTol) {
      std::ostringstream os;
      os << "rank(B) < X (smallest singular value " << smin << ")";
      a1.push_back(os.str());
    }
    report.assumption1_ok = a1.empty();
    report.failures.insert(report.failures.end(), a1.begin(), a1.end());
  }
  return report;
}

}  // namespace hmmid
