#include "hmmid/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "hmmid/estimators.hpp"
#include "hmmid/io.hpp"
#include "hmmid/random_system.hpp"
#include "hmmid/simulate.hpp"

namespace hmmid {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string sanitize_status(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n') c = ';';
  return s;
}

}  // namespace

const char* arm_csv_name(Arm arm) {
  switch (arm) {
    case Arm::mm: return "mom";
    case Arm::em: return "em";
    case Arm::em_mm: return "em_mom";
    case Arm::em_true: return "em_true";
    case Arm::two_step: return "newton";
  }
  return "?";
}

std::optional<Arm> arm_from_string(const std::string& name) {
  if (name == "mm" || name == "mom") return Arm::mm;
  if (name == "em") return Arm::em;
  if (name == "em-mm" || name == "em_mm" || name == "em_mom") return Arm::em_mm;
  if (name == "em-true" || name == "em_true") return Arm::em_true;
  if (name == "2s" || name == "newton" || name == "two-step") return Arm::two_step;
  return std::nullopt;
}

std::vector<long> BenchmarkConfig::default_sizes() {
  return {100, 316, 1000, 3162, 10000, 31623, 100000, 316228, 500000};
}

double rmse(const Matrix& P_hat, const Matrix& P_true) {
  if (P_hat.rows() != P_true.rows() || P_hat.cols() != P_true.cols())
    throw std::invalid_argument("rmse: dimension mismatch");
  return (P_hat - P_true).norm() / static_cast<double>(P_true.rows());
}

double median(std::vector<double> values) {
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::string BenchmarkResult::median_csv() const {
  std::ostringstream os;
  os << "N";
  for (int a = 0; a < kNumArms; ++a) os << ',' << arm_csv_name(static_cast<Arm>(a));
  for (int a = 0; a < kNumArms; ++a)
    os << ',' << arm_csv_name(static_cast<Arm>(a)) << "_time";
  os << '\n';
  for (const BenchmarkRow& row : rows) {
    os << row.n;
    for (int a = 0; a < kNumArms; ++a) os << ',' << format_double(row.rmse_median[a]);
    for (int a = 0; a < kNumArms; ++a) os << ',' << format_double(row.seconds_median[a]);
    os << '\n';
  }
  return os.str();
}

std::string BenchmarkResult::median_csv_no_timing() const {
  std::ostringstream os;
  os << "N";
  for (int a = 0; a < kNumArms; ++a) os << ',' << arm_csv_name(static_cast<Arm>(a));
  os << '\n';
  for (const BenchmarkRow& row : rows) {
    os << row.n;
    for (int a = 0; a < kNumArms; ++a) os << ',' << format_double(row.rmse_median[a]);
    os << '\n';
  }
  return os.str();
}

std::string BenchmarkResult::raw_csv() const {
  std::ostringstream os;
  os << "rep,N,arm,rmse,seconds,status\n";
  for (const RawRecord& rec : raw)
    os << rec.replicate << ',' << rec.n << ',' << arm_csv_name(rec.arm) << ','
       << format_double(rec.rmse) << ',' << format_double(rec.seconds) << ','
       << rec.status << '\n';
  return os.str();
}

namespace {

struct ArmOutcome {
  double rmse_value = kNaN;
  double seconds = kNaN;
  std::string status = "ok";
};

ArmOutcome run_arm(Arm arm, std::span<const int> prefix, const HmmModel& model,
                   const PolytopeBound& bound, const BenchmarkConfig& config,
                   const EstimationReport* mm_report, std::uint64_t em_init_seed) {
  ArmOutcome out;
  try {
    EstimationReport report;
    const auto t0 = Clock::now();
    switch (arm) {
      case Arm::mm:
        report = estimate_mm(prefix, model.B, model.pi0, bound);
        break;
      case Arm::two_step:
        report = estimate_two_step(prefix, model.B, model.pi0, bound);
        if (report.data_passes != 2)
          throw std::runtime_error("two-step pass counter != 2");
        break;
      case Arm::em: {
        Rng rng(em_init_seed);
        const Matrix P_init = random_transition_init(model.num_states, rng);
        report = estimate_em(prefix, model.B, model.pi0, P_init, config.em_tol,
                             config.em_max_iter, "EM");
        break;
      }
      case Arm::em_mm: {
        if (mm_report == nullptr)
          throw std::runtime_error("internal: EM-MM requires the MM estimate");
        const Matrix P_init = project_interior(mm_report->P_hat, kInteriorProjection);
        report = estimate_em(prefix, model.B, model.pi0, P_init, config.em_tol,
                             config.em_max_iter, "EM-MM");
        break;
      }
      case Arm::em_true:
        report = estimate_em(prefix, model.B, model.pi0, model.P, config.em_tol,
                             config.em_max_iter, "EM-True");
        break;
    }
    out.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    out.rmse_value = rmse(report.P_hat, model.P);
    if (arm == Arm::two_step && !report.hessian_negative_definite)
      out.status = "non_nd_hessian";
  } catch (const std::exception& e) {
    out.status = sanitize_status(std::string("error: ") + e.what());
  }
  return out;
}

}  // namespace

BenchmarkResult run_benchmark(const BenchmarkConfig& config) {
  BenchmarkConfig cfg = config;
  if (cfg.sizes.empty()) cfg.sizes = BenchmarkConfig::default_sizes();
  if (cfg.replicates < 1) throw std::invalid_argument("benchmark: replicates must be >= 1");
  if (cfg.arms.empty()) throw std::invalid_argument("benchmark: no arms requested");
  for (const long n : cfg.sizes)
    if (n < 2) throw std::invalid_argument("benchmark: sample sizes must be >= 2");

  std::vector<long> sizes = cfg.sizes;
  std::sort(sizes.begin(), sizes.end());
  const long max_n = sizes.back();

  const bool wants_mm =
      std::find(cfg.arms.begin(), cfg.arms.end(), Arm::mm) != cfg.arms.end();
  const bool wants_em_mm =
      std::find(cfg.arms.begin(), cfg.arms.end(), Arm::em_mm) != cfg.arms.end();

  BenchmarkResult result;

  for (int rep = 0; rep < cfg.replicates; ++rep) {
    const std::uint64_t rep_seed = cfg.master_seed ^ static_cast<std::uint64_t>(rep);
    const HmmModel model = generate_random_system(cfg.num_states, cfg.num_outputs,
                                                  Rng::derive(rep_seed, 0));
    const PolytopeBound bound = cfg.bound_override.has_value()
                                    ? make_elementwise_bound(*cfg.bound_override)
                                    : default_bound(model);
    Rng sample_rng(Rng::derive(rep_seed, 1));
    const SampleResult sampled = sample(model, max_n + 1, sample_rng);

    for (size_t si = 0; si < sizes.size(); ++si) {
      const long n = sizes[si];
      const std::span<const int> prefix(sampled.obs.labels.data(),
                                        static_cast<size_t>(n) + 1);

      // The MM estimate is shared: the MM arm reports it and EM-MM starts
      // from it (EM-MM timing covers the EM phase only; the moment phase is
      // accounted under the mom column).
      std::optional<EstimationReport> mm_report;
      std::string mm_status = "ok";
      double mm_seconds = kNaN;
      if (wants_mm || wants_em_mm) {
        try {
          const auto t0 = Clock::now();
          mm_report = estimate_mm(prefix, model.B, model.pi0, bound);
          mm_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
        } catch (const std::exception& e) {
          mm_status = sanitize_status(std::string("error: ") + e.what());
        }
      }

      for (const Arm arm : cfg.arms) {
        RawRecord rec;
        rec.replicate = rep;
        rec.n = n;
        rec.arm = arm;
        if (arm == Arm::mm) {
          rec.status = mm_status;
          rec.seconds = mm_seconds;
          rec.rmse = mm_report.has_value() ? rmse(mm_report->P_hat, model.P) : kNaN;
        } else if (arm == Arm::em_mm && !mm_report.has_value()) {
          rec.status = "error: EM-MM init unavailable (" + mm_status + ")";
          rec.rmse = kNaN;
          rec.seconds = kNaN;
        } else {
          const ArmOutcome out =
              run_arm(arm, prefix, model, bound, cfg,
                      mm_report.has_value() ? &*mm_report : nullptr,
                      Rng::derive(Rng::derive(rep_seed, 2), static_cast<std::uint64_t>(n)));
          rec.status = out.status;
          rec.rmse = out.rmse_value;
          rec.seconds = out.seconds;
        }
        result.raw.push_back(std::move(rec));
      }
    }
  }

  // Medians over completed replicates, per arm and size.
  for (const long n : sizes) {
    BenchmarkRow row;
    row.n = n;
    row.rmse_median.fill(kNaN);
    row.seconds_median.fill(kNaN);
    for (const Arm arm : cfg.arms) {
      std::vector<double> errs, times;
      for (const RawRecord& rec : result.raw) {
        if (rec.n != n || rec.arm != arm || !std::isfinite(rec.rmse)) continue;
        errs.push_back(rec.rmse);
        times.push_back(rec.seconds);
      }
      row.rmse_median[static_cast<int>(arm)] = median(std::move(errs));
      row.seconds_median[static_cast<int>(arm)] = median(std::move(times));
    }
    result.rows.push_back(row);
  }

  if (!cfg.output_path.empty()) {
    std::ofstream med(cfg.output_path + "_median.csv");
    if (!med) throw std::runtime_error("benchmark: cannot write " + cfg.output_path +
                                       "_median.csv");
    med << result.median_csv();
    std::ofstream raw(cfg.output_path + "_raw.csv");
    if (!raw) throw std::runtime_error("benchmark: cannot write " + cfg.output_path +
                                       "_raw.csv");
    raw << result.raw_csv();
  }
  return result;
}

}  // namespace hmmid
