#include <benchmark/benchmark.h>

#include <random>

#include "cartan/kernels.hpp"

using namespace cartan;
using namespace cartan::kernels;

namespace {

// r random rows x n tables, the shape produced by a stage with n forms
std::vector<QMatrix> tables(std::size_t r, std::size_t n) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> d(-5, 5);
  std::vector<QMatrix> F(r, QMatrix(n, n));
  for (auto& m : F)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m(i, j) = d(rng);
  return F;
}

template <DirectionPick (*Search)(const std::vector<QMatrix>&, const QMatrix&,
                                  const std::vector<Direction>&)>
void run(benchmark::State& state) {
  std::size_t n = static_cast<std::size_t>(state.range(0));
  auto F = tables(n * n / 2, n);
  auto grid = direction_grid(n, 50, 7);
  QMatrix stacked(0, F.size());
  for (auto _ : state) benchmark::DoNotOptimize(Search(F, stacked, grid));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * grid.size()));
}

}  // namespace

BENCHMARK(run<best_direction_serial>)->Name("direction_search/serial")->Arg(3)->Arg(5)->Arg(8);
BENCHMARK(run<best_direction_omp>)->Name("direction_search/omp")->Arg(3)->Arg(5)->Arg(8);

BENCHMARK_MAIN();
