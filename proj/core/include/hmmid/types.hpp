#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace hmmid {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Counts full sweeps over an observation sequence. The data-touching
/// recursions call begin_pass() once per sweep, so estimator reports can
/// certify how many passes an algorithm actually made.
struct PassCounter {
  long passes = 0;
  void begin_pass() { ++passes; }
};

inline void note_pass(PassCounter* counter) {
  if (counter != nullptr) counter->begin_pass();
}

/// Seedable generator used by every stochastic operation (mt19937_64 under
/// the hood). Uniform doubles are built from the top 53 bits of the raw
/// stream so sequences are bit-reproducible for a fixed seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform draw in [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Index drawn from a probability vector (entries >= 0, summing to ~1).
  int categorical(const Vector& probs);

  /// Deterministic sub-stream seed (splitmix64 finalizer of seed ^ mix(stream)).
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

 private:
  std::mt19937_64 gen_;
};

}  // namespace hmmid
