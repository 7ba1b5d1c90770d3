#include "hmmid/moments.hpp"

#include <stdexcept>

#include "hmmid/stationary.hpp"

namespace hmmid {

namespace {

MomentMatrix moments_at(const HmmModel& model, const Vector& pi,
                        MomentMatrix::Kind kind, int lag) {
  MomentMatrix result;
  result.kind = kind;
  result.lag = lag;
  result.m = model.B.transpose() * pi.asDiagonal() * model.P * model.B;
  return result;
}

}  // namespace

MomentMatrix analytic_moments(const HmmModel& model, int k) {
  if (k < 0) throw std::invalid_argument("analytic_moments: k must be nonnegative");
  Vector pi = model.pi0;
  for (int step = 0; step < k; ++step) pi = model.P.transpose() * pi;
  return moments_at(model, pi, MomentMatrix::Kind::analytic, k);
}

MomentMatrix analytic_moments_stationary(const HmmModel& model) {
  const Vector pi = stationary_distribution(model.P);
  return moments_at(model, pi, MomentMatrix::Kind::analytic_stationary, 0);
}

LumpedChain lumped_chain(const HmmModel& model) {
  const int X = model.num_states;
  const int Y = model.num_outputs;
  LumpedChain chain;
  chain.num_outputs = Y;
  chain.num_states = X;
  chain.T = Matrix::Zero(chain.size(), chain.size());

  // (i, j, l) -> (i', j', l') has mass only when i' = j.
  for (int l = 0; l < X; ++l)
    for (int j = 0; j < Y; ++j)
      for (int i = 0; i < Y; ++i) {
        const int from = chain.index(i, j, l);
        for (int lp = 0; lp < X; ++lp)
          for (int jp = 0; jp < Y; ++jp)
            chain.T(from, chain.index(j, jp, lp)) = model.P(l, lp) * model.B(lp, jp);
      }
  return chain;
}

}  // namespace hmmid
