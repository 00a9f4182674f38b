#include <benchmark/benchmark.h>
#include <omp.h>

#include <vector>

#include "qsd/kernels.hpp"
#include "qsd/mc/monte_carlo.hpp"
#include "qsd/models/bdc.hpp"
#include "qsd/semigroup.hpp"

using namespace qsd;

namespace {

const SubMarkovGenerator& bdnu(std::size_t n) {
  static std::vector<std::pair<std::size_t, SubMarkovGenerator>> cache;
  for (auto& [k, g] : cache)
    if (k == n) return g;
  BDNUParams p;
  p.n_max = n;
  cache.emplace_back(n, build_bdnu(p));
  return cache.back().second;
}

template <bool Parallel>
void BM_LeftStep(benchmark::State& st) {
  std::size_t n = static_cast<std::size_t>(st.range(0));
  UniformizedKernel k(bdnu(n));
  std::vector<double> in(n, 1.0 / static_cast<double>(n)), out(n);
  for (auto _ : st) {
    if constexpr (Parallel) k.left_parallel(in, out);
    else k.left_serial(in, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations() * n));
}

template <bool Parallel>
void BM_RightStep(benchmark::State& st) {
  std::size_t n = static_cast<std::size_t>(st.range(0));
  UniformizedKernel k(bdnu(n));
  std::vector<double> in(n, 1.0), out(n);
  for (auto _ : st) {
    if constexpr (Parallel) k.right_parallel(in, out);
    else k.right_serial(in, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations() * n));
}

void BM_Propagate(benchmark::State& st) {
  std::size_t n = static_cast<std::size_t>(st.range(0));
  omp_set_num_threads(static_cast<int>(st.range(1)));
  Propagator prop(bdnu(n), 1e-10);
  auto mu = ScaledVector::from(ProbabilityVector::delta(n, 0).weights());
  for (auto _ : st) benchmark::DoNotOptimize(prop.apply(Side::Left, mu, 0.05));
}

void BM_FlemingViot(benchmark::State& st) {
  omp_set_num_threads(static_cast<int>(st.range(0)));
  BDNUParams p;
  p.n_max = 256;
  auto g = build_bdnu(p);
  auto mu = ProbabilityVector::delta(256, 0);
  for (auto _ : st) benchmark::DoNotOptimize(fleming_viot(g, mu, 1.0, 2000, 1));
}

}  // namespace

BENCHMARK(BM_LeftStep<false>)->Arg(1 << 10)->Arg(1 << 14)->Arg(1 << 18);
BENCHMARK(BM_LeftStep<true>)->Arg(1 << 10)->Arg(1 << 14)->Arg(1 << 18);
BENCHMARK(BM_RightStep<false>)->Arg(1 << 14)->Arg(1 << 18);
BENCHMARK(BM_RightStep<true>)->Arg(1 << 14)->Arg(1 << 18);
BENCHMARK(BM_Propagate)->Args({1 << 14, 1})->Args({1 << 14, 4})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FlemingViot)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
