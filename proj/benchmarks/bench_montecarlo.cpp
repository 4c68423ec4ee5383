#include <benchmark/benchmark.h>

#include "ustatlab/martingale.hpp"
#include "ustatlab/montecarlo.hpp"

namespace {

using namespace ustat;

void BM_ReplicateTailScan(benchmark::State& state) {
  ReplicateSpec spec{.kernel = product_kernel(),
                     .law = SamplerSpec::rademacher(),
                     .n = 40,
                     .replicas = 10'000,
                     .seed = 1,
                     .threads = static_cast<int>(state.range(0)),
                     .statistic = Statistic::kRunningMax};
  for (auto _ : state) benchmark::DoNotOptimize(replicate(spec).norms.data());
}
BENCHMARK(BM_ReplicateTailScan)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_SimulateSummaries(benchmark::State& state) {
  const auto plane = HilbertSpace::euclidean(2);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        simulate_summaries(MdsGenerator::kGaussianCoords, 50, plane, 10'000, 1, 1).size());
}
BENCHMARK(BM_SimulateSummaries)->Unit(benchmark::kMillisecond);

}  // namespace
