#include <benchmark/benchmark.h>

#include "mphate/kernel.hpp"
#include "mphate/random.hpp"
#include "mphate/trace.hpp"

namespace {

mphate::TimeTrace random_trace(std::size_t n, std::size_t m, std::size_t p) {
  mphate::Rng rng(1);
  std::vector<double> data(n * m * p);
  for (double& v : data) v = mphate::standard_normal(rng);
  return mphate::zscore(mphate::TimeTrace(n, m, p, data, std::vector<int>(m, 0)));
}

// Multislice kernel for n epochs of 96 units on 500 probe samples.
void BM_MultisliceKernel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const mphate::TimeTrace trace = random_trace(n, 96, 500);
  mphate::KernelParams params;
  params.kappa = std::min<std::size_t>(25, n - 1);
  for (auto _ : state) benchmark::DoNotOptimize(mphate::build_multislice_kernel(trace, params));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * 96));
}
BENCHMARK(BM_MultisliceKernel)->Arg(10)->Arg(30)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_ToOperator(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const mphate::TimeTrace trace = random_trace(n, 96, 100);
  mphate::KernelParams params;
  params.kappa = std::min<std::size_t>(25, n - 1);
  const mphate::MultisliceKernel k = mphate::build_multislice_kernel(trace, params);
  for (auto _ : state) benchmark::DoNotOptimize(mphate::to_operator(k));
}
BENCHMARK(BM_ToOperator)->Arg(10)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_Zscore(benchmark::State& state) {
  const mphate::TimeTrace trace = random_trace(60, 96, 500);
  for (auto _ : state) benchmark::DoNotOptimize(mphate::zscore(trace));
}
BENCHMARK(BM_Zscore)->Unit(benchmark::kMillisecond);

}  // namespace
