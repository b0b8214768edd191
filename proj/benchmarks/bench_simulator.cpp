#include <benchmark/benchmark.h>

#include "hcmm/simulator.hpp"

namespace {

hcmm::ClusterSpec scenario_cluster() {
  std::vector<hcmm::RuntimeModel> models(50, hcmm::RuntimeModel::exponential(1, 1));
  models.insert(models.end(), 50, hcmm::RuntimeModel::exponential(4, 0.5));
  return hcmm::ClusterSpec::from_models(models);
}

void monte_carlo_trial(benchmark::State& state) {
  const auto cluster = scenario_cluster();
  const auto alloc = hcmm::hcmm_allocate(cluster, 10000);
  hcmm::Rng rng(1);
  for (auto _ : state) {
    auto out = hcmm::simulate_once(cluster, alloc.loads, 10000, {}, rng);
    benchmark::DoNotOptimize(out.completion);
  }
}
BENCHMARK(monte_carlo_trial);

void estimate_5000_trials(benchmark::State& state) {
  const auto cluster = scenario_cluster();
  const auto alloc = hcmm::hcmm_allocate(cluster, 10000);
  for (auto _ : state) {
    auto est = hcmm::estimate_expected_time(cluster, alloc.loads, 10000, {}, 5000, hcmm::Rng(1),
                                            static_cast<unsigned>(state.range(0)));
    benchmark::DoNotOptimize(est.mean);
  }
}
BENCHMARK(estimate_5000_trials)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

}  // namespace
