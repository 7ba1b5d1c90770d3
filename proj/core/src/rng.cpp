#include "hmmid/types.hpp"

#include <stdexcept>

namespace hmmid {

int Rng::categorical(const Vector& probs) {
  if (probs.size() == 0) throw std::invalid_argument("categorical: empty probability vector");
  const double u = uniform();
  double acc = 0.0;
  const int n = static_cast<int>(probs.size());
  for (int i = 0; i < n; ++i) {
    acc += probs(i);
    if (u < acc) return i;
  }
  // u can land past the accumulated mass only through rounding
  return n - 1;
}

std::uint64_t Rng::derive(std::uint64_t seed, std::uint64_t stream) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  };
  return mix(seed ^ mix(stream));
}

}  // namespace hmmid
