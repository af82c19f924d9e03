#include <benchmark/benchmark.h>

#include "mphate/embed.hpp"
#include "mphate/random.hpp"

namespace {

mphate::Matrix distances(std::size_t n) {
  mphate::Rng rng(3);
  mphate::Matrix x(n, 5);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = mphate::standard_normal(rng);
  mphate::Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) d(i, j) = (x.row(i) - x.row(j)).norm();
  }
  return d;
}

void BM_ClassicalMds(benchmark::State& state) {
  const mphate::Matrix d = distances(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mphate::classical_mds(d, 2));
}
BENCHMARK(BM_ClassicalMds)->Arg(500)->Arg(1500)->Unit(benchmark::kMillisecond);

// SMACOF from the classical solution, the way the PHATE pipeline runs it.
void BM_Smacof(benchmark::State& state) {
  const mphate::Matrix d = distances(static_cast<std::size_t>(state.range(0)));
  const mphate::Matrix init = mphate::classical_mds(d, 2).coords;
  for (auto _ : state) benchmark::DoNotOptimize(mphate::smacof_mds(d, init));
}
BENCHMARK(BM_Smacof)->Arg(500)->Arg(1500)->Unit(benchmark::kMillisecond);

void BM_GeodesicDistances(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  mphate::Rng rng(4);
  mphate::Matrix k = mphate::Matrix::Identity(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) k(i, i + 1) = k(i + 1, i) = 0.5;
  for (Eigen::Index e = 0; e < 4 * n; ++e) {
    const auto i = static_cast<Eigen::Index>(mphate::uniform_index(rng, n));
    const auto j = static_cast<Eigen::Index>(mphate::uniform_index(rng, n));
    if (i != j) k(i, j) = k(j, i) = mphate::uniform01(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(mphate::geodesic_distances(k));
}
BENCHMARK(BM_GeodesicDistances)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace
