#include <benchmark/benchmark.h>

#include "ustatlab/distributions.hpp"
#include "ustatlab/hoeffding.hpp"
#include "ustatlab/kernels.hpp"
#include "ustatlab/ustats.hpp"

namespace {

using namespace ustat;

void BM_CompleteGini(benchmark::State& state) {
  const auto x = draw_iid(SamplerSpec::uniform_grid(5), static_cast<std::size_t>(state.range(0)), 1, 0);
  const auto k = gini_kernel();
  for (auto _ : state) benchmark::DoNotOptimize(complete(k, x));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(binomial(x.size(), 2)));
}
BENCHMARK(BM_CompleteGini)->Arg(100)->Arg(1000);

void BM_RunningMaxProduct(benchmark::State& state) {
  const auto x = draw_iid(SamplerSpec::rademacher(), static_cast<std::size_t>(state.range(0)), 1, 0);
  const auto k = product_kernel();
  for (auto _ : state) benchmark::DoNotOptimize(running_max(k, x).max);
}
BENCHMARK(BM_RunningMaxProduct)->Arg(40)->Arg(200);

void BM_IncompleteWithReplacement(benchmark::State& state) {
  const auto x = draw_iid(SamplerSpec::rademacher(), 200, 1, 0);
  const auto k = product_kernel();
  const auto design = SamplingDesign::with_replacement(static_cast<std::uint64_t>(state.range(0)));
  CounterRng rng(1, 0, 100);
  for (auto _ : state) {
    const Selection sel = draw_design(design, 2, x.size(), rng);
    benchmark::DoNotOptimize(incomplete(k, x, sel).value);
  }
}
BENCHMARK(BM_IncompleteWithReplacement)->Arg(1000)->Arg(10000);

void BM_DegeneracyOrder(benchmark::State& state) {
  const auto dist = FiniteDistribution::uniform_grid(static_cast<int>(state.range(0)));
  const auto k = gini_kernel();
  for (auto _ : state) benchmark::DoNotOptimize(degeneracy_order(k, dist).order);
}
BENCHMARK(BM_DegeneracyOrder)->Arg(3)->Arg(9);

}  // namespace
