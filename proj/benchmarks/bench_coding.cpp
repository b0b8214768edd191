#include <benchmark/benchmark.h>

#include "hcmm/coding.hpp"
#include "hcmm/emulator.hpp"

namespace {

void peel_inner_products(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const auto spec = hcmm::robust_soliton(k, 0.03, 0.1, 0.13);
  hcmm::Rng rng(1);
  const auto y = hcmm::integer_matrix(k, 1, rng);
  const auto symbols = hcmm::lt_encode(y, static_cast<std::size_t>(spec.symbols_to_wait_for()) + k / 10,
                                       spec, rng);
  for (auto _ : state) {
    auto res = hcmm::lt_decode_peel(symbols, k);
    benchmark::DoNotOptimize(res.success);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(k));
}
BENCHMARK(peel_inner_products)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void rlc_decode_square(benchmark::State& state) {
  const auto r = static_cast<std::size_t>(state.range(0));
  hcmm::Rng rng(2);
  const auto S = hcmm::gaussian_matrix(r, r, rng);
  const auto z = hcmm::gaussian_vector(r, rng);
  for (auto _ : state) {
    auto y = hcmm::rlc_decode(S, z);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(rlc_decode_square)->Arg(100)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

void lt_encode_rows(benchmark::State& state) {
  const std::size_t k = 10000;
  const auto spec = hcmm::robust_soliton(k, 0.03, 0.1, 0.13);
  hcmm::Rng data(3);
  const auto A = hcmm::integer_matrix(k, static_cast<std::size_t>(state.range(0)), data);
  for (auto _ : state) {
    hcmm::Rng rng(4);
    auto symbols = hcmm::lt_encode(A, 11300, spec, rng);
    benchmark::DoNotOptimize(symbols.data());
  }
}
BENCHMARK(lt_encode_rows)->Arg(1)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace
