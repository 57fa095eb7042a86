#include <benchmark/benchmark.h>

#include "spiro/dataset.hpp"
#include "spiro/fields.hpp"
#include "spiro/geometry.hpp"

namespace {

void BM_HarmonicValue(benchmark::State& state) {
  const spiro::HarmonicIndex idx{static_cast<int>(state.range(0)),
                                 static_cast<int>(state.range(0)) / 2};
  const spiro::SphericalPoint p(1.1, 2.3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(spiro::real_spherical_harmonic(idx, p));
  }
}
BENCHMARK(BM_HarmonicValue)->Arg(1)->Arg(8)->Arg(31);

void BM_HarmonicGradient(benchmark::State& state) {
  const spiro::HarmonicIndex idx{static_cast<int>(state.range(0)),
                                 -static_cast<int>(state.range(0)) / 3};
  const spiro::SphericalPoint p(0.7, 5.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(spiro::harmonic_gradient(idx, p));
  }
}
BENCHMARK(BM_HarmonicGradient)->Arg(1)->Arg(8)->Arg(31);

void BM_BuildDataset(benchmark::State& state) {
  const auto m = spiro::DatasetManifest::for_degree(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(spiro::build_dataset(m));
  }
  state.SetItemsProcessed(state.iterations() * m.num_fields);
}
BENCHMARK(BM_BuildDataset)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace
