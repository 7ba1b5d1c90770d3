// Microbenchmarks for the hot paths: forward likelihood, derivative
// recursions, the moment QP and one EM sweep.

#include <benchmark/benchmark.h>

#include "hmmid/estimators.hpp"
#include "hmmid/likelihood.hpp"
#include "hmmid/moment_matching.hpp"
#include "hmmid/random_system.hpp"
#include "hmmid/simulate.hpp"

namespace {

struct Fixture {
  hmmid::HmmModel model;
  hmmid::SampleResult data;
  hmmid::PolytopeBound bound;
  hmmid::ThetaVector theta;

  Fixture(int states, long n_obs)
      : model(hmmid::generate_random_system(states, states, 42)),
        data(hmmid::sample(model, n_obs, 43)),
        bound(hmmid::default_bound(model)),
        theta(hmmid::theta_from_P(model.P)) {}
};

void BM_LogLikelihood(benchmark::State& state) {
  static const Fixture fx(5, 100001);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        hmmid::log_likelihood(fx.theta, fx.model.B, fx.model.pi0, fx.data.obs.labels));
  }
  state.SetItemsProcessed(state.iterations() * 100000);
}
BENCHMARK(BM_LogLikelihood)->Unit(benchmark::kMillisecond);

void BM_GradientHessian(benchmark::State& state) {
  static const Fixture fx(static_cast<int>(state.range(0)), 10001);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        hmmid::gradient_hessian(fx.theta, fx.model.B, fx.model.pi0, fx.data.obs.labels));
  }
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_GradientHessian)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_EmpiricalMoments(benchmark::State& state) {
  static const Fixture fx(5, 100001);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hmmid::empirical_moments(fx.data.obs, 5));
  }
  state.SetItemsProcessed(state.iterations() * 100000);
}
BENCHMARK(BM_EmpiricalMoments)->Unit(benchmark::kMillisecond);

void BM_MomentQp(benchmark::State& state) {
  static const Fixture fx(5, 100001);
  const auto moments = hmmid::empirical_moments(fx.data.obs, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hmmid::solve_moment_matching(moments, fx.model.B, fx.bound));
  }
}
BENCHMARK(BM_MomentQp)->Unit(benchmark::kMillisecond);

void BM_EmIteration(benchmark::State& state) {
  static const Fixture fx(5, 100001);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hmmid::estimate_em(fx.data.obs.labels, fx.model.B,
                                                fx.model.pi0, fx.model.P, 1e-6, 1));
  }
}
BENCHMARK(BM_EmIteration)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
