#pragma once

#include <cstdint>

#include "hmmid/model.hpp"
#include "hmmid/types.hpp"

namespace hmmid {

struct SampleResult {
  ObservationSequence obs;
  std::vector<int> states;  // hidden path, same length as obs.labels
};

/// Draws n_obs observations: x_0 ~ pi0, then for each step y_k ~ row x_k of
/// B followed by x_{k+1} ~ row x_k of P. Deterministic given the generator
/// state. Requires structural validity and n_obs >= 2.
SampleResult sample(const HmmModel& model, long n_obs, Rng& rng);
SampleResult sample(const HmmModel& model, long n_obs, std::uint64_t seed);

}  // namespace hmmid
