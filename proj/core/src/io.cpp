#include "hmmid/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace hmmid {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace {

// Whitespace-separated numbers with '#'-to-end-of-line comments, tracking
// line numbers for error messages.
class TokenReader {
 public:
  TokenReader(std::istream& in, std::string name) : in_(in), name_(std::move(name)) {}

  bool next(std::string& token) {
    while (true) {
      if (!(line_stream_ >> token)) {
        std::string line;
        if (!std::getline(in_, line)) return false;
        ++line_no_;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line_stream_.clear();
        line_stream_.str(line);
        continue;
      }
      return true;
    }
  }

  double next_double(const char* what) {
    std::string token;
    if (!next(token)) fail(std::string("unexpected end of input, expected ") + what);
    try {
      size_t used = 0;
      const double v = std::stod(token, &used);
      if (used != token.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      fail("not a number: '" + token + "' (expected " + what + ")");
    }
  }

  long next_long(const char* what) {
    const double v = next_double(what);
    const long n = static_cast<long>(v);
    if (static_cast<double>(n) != v)
      fail(std::string("expected an integer for ") + what);
    return n;
  }

  [[noreturn]] void fail(const std::string& message) const {
    std::ostringstream os;
    os << name_ << ":" << line_no_ << ": " << message;
    throw ParseError(os.str());
  }

  int line() const { return line_no_; }

 private:
  std::istream& in_;
  std::string name_;
  std::istringstream line_stream_;
  int line_no_ = 0;
};

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ":0: cannot open file");
  return in;
}

}  // namespace

HmmModel read_model(std::istream& in, const std::string& name) {
  TokenReader reader(in, name);
  HmmModel model;
  model.num_states = static_cast<int>(reader.next_long("X"));
  model.num_outputs = static_cast<int>(reader.next_long("Y"));
  if (model.num_states < 1 || model.num_outputs < 1)
    reader.fail("X and Y must be positive");

  const int X = model.num_states;
  const int Y = model.num_outputs;
  model.P.resize(X, X);
  for (int i = 0; i < X; ++i)
    for (int j = 0; j < X; ++j) model.P(i, j) = reader.next_double("P entry");
  model.B.resize(X, Y);
  for (int i = 0; i < X; ++i)
    for (int j = 0; j < Y; ++j) model.B(i, j) = reader.next_double("B entry");
  model.pi0.resize(X);
  for (int i = 0; i < X; ++i) model.pi0(i) = reader.next_double("pi0 entry");

  std::string extra;
  if (reader.next(extra)) reader.fail("trailing content '" + extra + "'");

  const ValidationReport report = validate_model(model, ValidationLevel::structural);
  if (!report.structural_ok) {
    std::ostringstream os;
    os << "invalid model:";
    for (const auto& f : report.failures) os << ' ' << f << ';';
    reader.fail(os.str());
  }
  return model;
}

HmmModel read_model_file(const std::string& path) {
  auto in = open_or_throw(path);
  return read_model(in, path);
}

void write_model(std::ostream& out, const HmmModel& model) {
  out << "# X Y, then P (X rows), B (X rows), pi0\n";
  out << model.num_states << ' ' << model.num_outputs << '\n';
  for (int i = 0; i < model.num_states; ++i) {
    for (int j = 0; j < model.num_states; ++j)
      out << (j ? " " : "") << format_double(model.P(i, j));
    out << '\n';
  }
  for (int i = 0; i < model.num_states; ++i) {
    for (int j = 0; j < model.num_outputs; ++j)
      out << (j ? " " : "") << format_double(model.B(i, j));
    out << '\n';
  }
  for (int i = 0; i < model.num_states; ++i)
    out << (i ? " " : "") << format_double(model.pi0(i));
  out << '\n';
}

void write_model_file(const std::string& path, const HmmModel& model) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_model(out, model);
}

ObservationSequence read_observations(std::istream& in, const std::string& name) {
  TokenReader reader(in, name);
  ObservationSequence obs;
  std::string token;
  while (reader.next(token)) {
    long label = 0;
    try {
      size_t used = 0;
      label = std::stol(token, &used);
      if (used != token.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      reader.fail("not an integer label: '" + token + "'");
    }
    if (label < 1) reader.fail("labels are 1-based, got " + token);
    obs.labels.push_back(static_cast<int>(label - 1));
  }
  return obs;
}

ObservationSequence read_observations_file(const std::string& path) {
  auto in = open_or_throw(path);
  return read_observations(in, path);
}

void write_observations(std::ostream& out, const ObservationSequence& obs) {
  out << "# one 1-based observation label per line\n";
  for (const int y : obs.labels) out << y + 1 << '\n';
}

void write_observations_file(const std::string& path, const ObservationSequence& obs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_observations(out, obs);
}

Matrix read_matrix(std::istream& in, int rows, int cols, const std::string& name) {
  TokenReader reader(in, name);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = reader.next_double("matrix entry");
  std::string extra;
  if (reader.next(extra)) reader.fail("trailing content '" + extra + "'");
  return m;
}

Matrix read_matrix_file(const std::string& path, int rows, int cols) {
  auto in = open_or_throw(path);
  return read_matrix(in, rows, cols, path);
}

std::string moment_csv(const MomentMatrix& moments) {
  std::ostringstream os;
  const int Y = static_cast<int>(moments.m.rows());
  for (int j = 0; j < Y; ++j) os << (j ? "," : "") << 'y' << j + 1;
  os << '\n';
  for (int i = 0; i < Y; ++i) {
    for (int j = 0; j < Y; ++j) os << (j ? "," : "") << format_double(moments.m(i, j));
    os << '\n';
  }
  return os.str();
}

namespace {

void kv_matrix(std::ostringstream& os, const std::string& key, const Matrix& m) {
  for (int i = 0; i < m.rows(); ++i) {
    os << key << "_row_" << i + 1 << '=';
    for (int j = 0; j < m.cols(); ++j) os << (j ? " " : "") << format_double(m(i, j));
    os << '\n';
  }
}

void kv_vector(std::ostringstream& os, const std::string& key, const Vector& v) {
  os << key << '=';
  for (int i = 0; i < v.size(); ++i) os << (i ? " " : "") << format_double(v(i));
  os << '\n';
}

}  // namespace

std::string report_to_kv(const EstimationReport& report) {
  std::ostringstream os;
  os << "method=" << report.method << '\n';
  kv_matrix(os, "p_hat", report.P_hat);
  if (report.pi_hat) kv_vector(os, "pi_hat", *report.pi_hat);
  if (report.theta_hat) kv_vector(os, "theta_hat", *report.theta_hat);
  if (report.loglik) os << "loglik=" << format_double(*report.loglik) << '\n';
  if (report.gradient_norm)
    os << "gradient_norm=" << format_double(*report.gradient_norm) << '\n';
  os << "hessian_negative_definite=" << (report.hessian_negative_definite ? 1 : 0) << '\n';
  if (report.fisher) {
    kv_matrix(os, "fisher", *report.fisher);
    os << "fisher_positive_definite=" << (report.fisher_positive_definite ? 1 : 0) << '\n';
  }
  os << "regularization=" << format_double(report.regularization) << '\n';
  os << "iterations=" << report.iterations << '\n';
  os << "data_passes=" << report.data_passes << '\n';
  os << "seconds_moments=" << format_double(report.seconds_moments) << '\n';
  os << "seconds_qp=" << format_double(report.seconds_qp) << '\n';
  os << "seconds_derivatives=" << format_double(report.seconds_derivatives) << '\n';
  os << "seconds_em=" << format_double(report.seconds_em) << '\n';
  os << "seconds_total=" << format_double(report.seconds_total) << '\n';
  os << "qp_objective=" << format_double(report.qp_objective) << '\n';
  os << "qp_kkt_stationarity=" << format_double(report.qp_kkt_stationarity) << '\n';
  os << "qp_kkt_feasibility=" << format_double(report.qp_kkt_feasibility) << '\n';
  os << "qp_kkt_complementarity=" << format_double(report.qp_kkt_complementarity) << '\n';
  os << "qp_iterations=" << report.qp_iterations << '\n';
  return os.str();
}

std::string qp_csv(const QpProblem& problem) {
  std::ostringstream os;
  auto block = [&os](const char* name, const Matrix& m) {
    os << name << '\n';
    for (int i = 0; i < m.rows(); ++i) {
      for (int j = 0; j < m.cols(); ++j) os << (j ? "," : "") << format_double(m(i, j));
      os << '\n';
    }
  };
  block("Q", problem.Q);
  block("q", problem.q.transpose());
  block("G", problem.G);
  block("g", problem.g.transpose());
  block("D", problem.D);
  block("d", problem.d.transpose());
  return os.str();
}

}  // namespace hmmid
