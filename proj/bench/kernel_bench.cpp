// Parallel kernels against their serial references.
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "l0path/kernels.hpp"

using namespace l0path;

namespace {

DataMatrix make_matrix(std::size_t n, std::size_t p, bool sparse) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  std::vector<double> v(n * p, 0.0);
  for (double& x : v) {
    if (!sparse || unif(rng) < 0.05) x = normal(rng);
  }
  DataMatrix m = DataMatrix::dense(n, p, std::move(v));
  return sparse ? m.to_sparse() : m;
}

std::vector<double> make_vector(std::size_t n) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  std::vector<double> v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

template <bool Parallel, bool Sparse>
void BM_all_column_dots(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0));
  const DataMatrix x = make_matrix(1000, p, Sparse);
  const std::vector<double> r = make_vector(1000);
  std::vector<double> out(p);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::all_column_dots(x, r, out);
    } else {
      kernels::serial::all_column_dots(x, r, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.counters["threads"] = Parallel ? kernels::active_threads() : 1;
}

template <bool Parallel>
void BM_linear_predictor(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0));
  const DataMatrix x = make_matrix(1000, p, false);
  std::vector<double> dense(p, 0.0);
  for (std::size_t i = 0; i < p; i += 10) dense[i] = 1.0;
  const SparseVector beta = SparseVector::from_dense(dense);
  std::vector<double> out(1000);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::linear_predictor(x, 0.5, beta, out);
    } else {
      kernels::serial::linear_predictor(x, 0.5, beta, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(BM_all_column_dots<false, false>)->Arg(1000)->Arg(10000);
BENCHMARK(BM_all_column_dots<true, false>)->Arg(1000)->Arg(10000);
BENCHMARK(BM_all_column_dots<false, true>)->Arg(1000)->Arg(10000);
BENCHMARK(BM_all_column_dots<true, true>)->Arg(1000)->Arg(10000);
BENCHMARK(BM_linear_predictor<false>)->Arg(1000)->Arg(10000);
BENCHMARK(BM_linear_predictor<true>)->Arg(1000)->Arg(10000);

BENCHMARK_MAIN();
