#include "hmmid/simulate.hpp"

#include <stdexcept>

namespace hmmid {

SampleResult sample(const HmmModel& model, long n_obs, Rng& rng) {
  if (n_obs < 2) throw std::invalid_argument("sample: n_obs must be at least 2");
  const auto report = validate_model(model, ValidationLevel::structural);
  if (!report.structural_ok)
    throw std::invalid_argument("sample: model is not structurally valid: " +
                                report.failures.front());

  SampleResult result;
  result.obs.labels.resize(n_obs);
  result.states.resize(n_obs);

  int x = rng.categorical(model.pi0);
  for (long k = 0; k < n_obs; ++k) {
    result.states[k] = x;
    result.obs.labels[k] = rng.categorical(model.B.row(x).transpose());
    if (k + 1 < n_obs) x = rng.categorical(model.P.row(x).transpose());
  }
  return result;
}

SampleResult sample(const HmmModel& model, long n_obs, std::uint64_t seed) {
  Rng rng(seed);
  return sample(model, n_obs, rng);
}

}  // namespace hmmid
