#include <benchmark/benchmark.h>

#include "mphate/diffusion.hpp"
#include "mphate/random.hpp"

namespace {

mphate::DiffusionOperator random_operator(std::size_t n) {
  mphate::Rng rng(2);
  mphate::Matrix k(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) k(i, j) = k(j, i) = mphate::uniform01(rng);
  }
  return mphate::to_operator(k);
}

void BM_SpectralDecompose(benchmark::State& state) {
  const mphate::DiffusionOperator op = random_operator(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mphate::spectral_decompose(op, 0));
}
BENCHMARK(BM_SpectralDecompose)->Arg(250)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_TransitionPower(benchmark::State& state) {
  const mphate::DiffusionOperator op = random_operator(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mphate::transition_power(op, 9));
}
BENCHMARK(BM_TransitionPower)->Arg(500)->Arg(1500)->Unit(benchmark::kMillisecond);

void BM_PotentialDistance(benchmark::State& state) {
  const mphate::DiffusionOperator op = random_operator(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mphate::potential_distance(op, 9, 0.0));
}
BENCHMARK(BM_PotentialDistance)->Arg(500)->Arg(1500)->Unit(benchmark::kMillisecond);

}  // namespace
