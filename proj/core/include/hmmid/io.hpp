#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "hmmid/estimators.hpp"
#include "hmmid/model.hpp"
#include "hmmid/moments.hpp"
#include "hmmid/qp.hpp"

namespace hmmid {

/// Malformed-input error carrying "file:line: message".
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest round-trippable decimal representation ("%.17g"); nan prints as
/// "nan". Used for every CSV and key-value artifact so reruns are
/// byte-comparable.
std::string format_double(double value);

/// Model file format: first line "X Y", then X rows of P, X rows of B and
/// one line of pi0, whitespace separated; '#' starts a comment. Parsing
/// applies strict structural validation (row sums within 1e-12).
HmmModel read_model(std::istream& in, const std::string& name = "<stream>");
HmmModel read_model_file(const std::string& path);
void write_model(std::ostream& out, const HmmModel& model);
void write_model_file(const std::string& path, const HmmModel& model);

/// Observation file format: one 1-based label per line, '#' comments.
ObservationSequence read_observations(std::istream& in,
                                      const std::string& name = "<stream>");
ObservationSequence read_observations_file(const std::string& path);
void write_observations(std::ostream& out, const ObservationSequence& obs);
void write_observations_file(const std::string& path, const ObservationSequence& obs);

/// A bare rows-by-cols numeric matrix in the same comment/number syntax as
/// the model file; used for elementwise lower-bound matrices.
Matrix read_matrix(std::istream& in, int rows, int cols,
                   const std::string& name = "<stream>");
Matrix read_matrix_file(const std::string& path, int rows, int cols);

/// Moment matrix as CSV: Y header columns y1..yY, then Y rows.
std::string moment_csv(const MomentMatrix& moments);

/// Estimation report as flat key=value text (matrices one row per key,
/// 1-based row labels).
std::string report_to_kv(const EstimationReport& report);

/// QP blocks as CSV sections, for the solver debug dump.
std::string qp_csv(const QpProblem& problem);

}  // namespace hmmid
