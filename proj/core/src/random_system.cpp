#include "hmmid/random_system.hpp"

#include <stdexcept>

#include "hmmid/stationary.hpp"

namespace hmmid {

HmmModel generate_random_system(int num_states, int num_outputs, std::uint64_t seed) {
  if (num_states < 1 || num_outputs < 1)
    throw std::invalid_argument("generate_random_system: X and Y must be positive");
  Rng rng(seed);

  for (int attempt = 0; attempt < 100; ++attempt) {
    HmmModel model;
    model.num_states = num_states;
    model.num_outputs = num_outputs;

    model.P.resize(num_states, num_states);
    for (int i = 0; i < num_states; ++i) {
      for (int j = 0; j < num_states; ++j)
        model.P(i, j) = (i == j ? 1.0 : 0.0) + rng.uniform() / num_states;
      model.P.row(i) /= model.P.row(i).sum();
    }

    model.B.resize(num_states, num_outputs);
    for (int i = 0; i < num_states; ++i) {
      for (int j = 0; j < num_outputs; ++j)
        model.B(i, j) = (i == j ? 1.0 : 0.0) + rng.uniform() / num_outputs;
      model.B.row(i) /= model.B.row(i).sum();
    }

    try {
      model.pi0 = stationary_distribution(model.P);
    } catch (const std::runtime_error&) {
      continue;
    }
    if (validate_model(model, ValidationLevel::assumption1).ok(ValidationLevel::assumption1))
      return model;
  }
  throw std::runtime_error("generate_random_system: no valid system after 100 attempts");
}

PolytopeBound default_bound(const HmmModel& model) {
  const Vector pi = stationary_distribution(model.P);
  Vector lower = Vector::Constant(model.num_states, pi.minCoeff() / 10.0);
  return make_elementwise_bound(std::move(lower));
}

}  // namespace hmmid
