#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hmmid/types.hpp"

namespace hmmid {

/// Estimator arms of the comparison harness. CSV column names follow the
/// series names of the benchmark figures: mom, em, em_mom, em_true, newton.
enum class Arm { mm = 0, em = 1, em_mm = 2, em_true = 3, two_step = 4 };
inline constexpr int kNumArms = 5;

const char* arm_csv_name(Arm arm);
std::optional<Arm> arm_from_string(const std::string& name);

struct BenchmarkConfig {
  int num_states = 5;
  int num_outputs = 5;
  std::vector<long> sizes;  // observation pair counts; defaults below
  int replicates = 100;
  std::uint64_t master_seed = 1;
  std::vector<Arm> arms = {Arm::mm, Arm::em, Arm::em_mm, Arm::em_true, Arm::two_step};
  std::optional<Vector> bound_override;  // default: tenth of min stationary entry
  double em_tol = 1e-6;
  int em_max_iter = 500;
  std::string output_path;  // prefix for <path>_median.csv / <path>_raw.csv; empty: no files

  /// Log-spaced default grid 1e2 ... 5e5.
  static std::vector<long> default_sizes();
};

/// Median RMSE and wall-clock seconds per arm at one sample size. Entries
/// for arms outside the run are NaN.
struct BenchmarkRow {
  long n = 0;
  std::array<double, kNumArms> rmse_median;
  std::array<double, kNumArms> seconds_median;
};

/// One (replicate, size, arm) outcome for box-plot style analysis.
struct RawRecord {
  int replicate = 0;
  long n = 0;
  Arm arm = Arm::mm;
  double rmse = 0.0;
  double seconds = 0.0;
  std::string status;  // "ok", "non_nd_hessian", or "error: ..."
};

struct BenchmarkResult {
  std::vector<BenchmarkRow> rows;
  std::vector<RawRecord> raw;

  std::string median_csv() const;
  std::string raw_csv() const;
  /// median_csv with the timing columns removed; the deterministic part.
  std::string median_csv_no_timing() const;
};

/// Root mean squared elementwise error: ||P_hat - P||_F / X, the Frobenius
/// distance normalized by sqrt(X^2) entries.
double rmse(const Matrix& P_hat, const Matrix& P_true);

/// Sorted-middle median; even counts average the two central values.
double median(std::vector<double> values);

/// Runs the Monte Carlo comparison: per replicate r a fresh random system is
/// generated from master_seed ^ r, one sequence of max(sizes)+1 observations
/// is sampled, and every arm runs on every prefix so comparisons are paired.
/// Timing covers the estimator call only. Raw failures are recorded with
/// their status and excluded only from medians they produced no estimate for.
BenchmarkResult run_benchmark(const BenchmarkConfig& config);

}  // namespace hmmid
