#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "snaptag/numkernel.hpp"

namespace {

std::vector<float> random_vec(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  std::vector<float> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

void bm_dot_scalar(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto a = random_vec(n, 1);
  auto b = random_vec(n, 2);
  for (auto _ : state)
    benchmark::DoNotOptimize(snaptag::dot_scalar(a, b));
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * n);
}

void bm_dot_simd(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto a = random_vec(n, 1);
  auto b = random_vec(n, 2);
  for (auto _ : state)
    benchmark::DoNotOptimize(snaptag::dot_simd(a, b));
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * n);
  state.SetLabel(snaptag::simd_backend());
}

void bm_matvec(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto m = random_vec(n * n, 3);
  auto v = random_vec(n, 4);
  const bool simd = state.range(1) != 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        snaptag::matvec({m.data(), n, n}, v, simd));
}

}  // namespace

BENCHMARK(bm_dot_scalar)->Arg(256)->Arg(4096)->Arg(65536);
BENCHMARK(bm_dot_simd)->Arg(256)->Arg(4096)->Arg(65536);
BENCHMARK(bm_matvec)->Args({256, 0})->Args({256, 1});

BENCHMARK_MAIN();
