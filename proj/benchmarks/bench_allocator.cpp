#include <benchmark/benchmark.h>

#include "hcmm/allocator.hpp"

namespace {

void solve_lambda_exponential(benchmark::State& state) {
  const auto m = hcmm::RuntimeModel::exponential(0.5, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(hcmm::solve_lambda(m).lambda);
}
BENCHMARK(solve_lambda_exponential);

void solve_lambda_weibull(benchmark::State& state) {
  const auto m = hcmm::RuntimeModel::weibull(12.0, 0.25, 1.5);
  for (auto _ : state) benchmark::DoNotOptimize(hcmm::solve_lambda(m).lambda);
}
BENCHMARK(solve_lambda_weibull);

void hcmm_allocate_cluster(benchmark::State& state) {
  std::vector<hcmm::RuntimeModel> models;
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    models.push_back(i % 2 ? hcmm::RuntimeModel::weibull(1, 1, 1.2)
                           : hcmm::RuntimeModel::weibull(4, 0.5, 0.8));
  }
  const auto cluster = hcmm::ClusterSpec::from_models(models);
  for (auto _ : state) benchmark::DoNotOptimize(hcmm::hcmm_allocate(cluster, 10000).tau_star);
}
BENCHMARK(hcmm_allocate_cluster)->Arg(100)->Arg(1000);

}  // namespace
