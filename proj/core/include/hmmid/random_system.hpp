#pragma once

#include <cstdint>

#include "hmmid/model.hpp"
#include "hmmid/moment_matching.hpp"

namespace hmmid {

/// Random test system: P = normalize_rows(I + U/X) and
/// B = normalize_rows([I 0] + U'/Y) with i.i.d. uniform(0,1) entries, drawn
/// row-major, regenerated (at most 100 times) until the assumption1 checks
/// pass. pi0 is set to the stationary distribution of P so sampled sequences
/// are stationary from the first step. Byte-identical for a fixed seed.
HmmModel generate_random_system(int num_states, int num_outputs, std::uint64_t seed);

/// The default bound policy: one tenth of the smallest entry of the true
/// stationary distribution, as a constant vector.
PolytopeBound default_bound(const HmmModel& model);

}  // namespace hmmid
