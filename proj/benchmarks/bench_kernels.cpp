#include <benchmark/benchmark.h>

#include "common.hpp"
#include "ekm/kernels.hpp"

namespace {

using namespace ekm;

constexpr std::size_t kDim = 15;

void BM_rdtw(benchmark::State& state) {
    const auto n = std::size_t(state.range(0));
    const auto x = bench::walk(n, kDim, 1), y = bench::walk(n, kDim, 2);
    KernelParams p;
    p.nu = 0.05;
    for (auto _ : state) benchmark::DoNotOptimize(rdtw_log_kernel({x, n, kDim}, {y, n, kDim}, p));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_rdtw)->DenseRange(10, 30, 5)->Arg(60)->Arg(120)->Complexity(benchmark::oNSquared);

// large stiffness drives cells below the direct-recursion floor
void BM_rdtw_logspace(benchmark::State& state) {
    const auto n = std::size_t(state.range(0));
    const auto x = bench::walk(n, kDim, 1), y = bench::walk(n, kDim, 2);
    KernelParams p;
    p.nu = 500.0;
    for (auto _ : state) benchmark::DoNotOptimize(rdtw_log_kernel({x, n, kDim}, {y, n, kDim}, p));
}
BENCHMARK(BM_rdtw_logspace)->Arg(15)->Arg(30);

void BM_rdtw_corridor(benchmark::State& state) {
    const std::size_t n = 120;
    const auto x = bench::walk(n, kDim, 1), y = bench::walk(n, kDim, 2);
    KernelParams p;
    p.nu = 0.05;
    p.corridor_radius = std::size_t(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(rdtw_log_kernel({x, n, kDim}, {y, n, kDim}, p));
}
BENCHMARK(BM_rdtw_corridor)->Arg(5)->Arg(20)->Arg(60);

void BM_dtw(benchmark::State& state) {
    const auto n = std::size_t(state.range(0));
    const auto x = bench::walk(n, kDim, 1), y = bench::walk(n, kDim, 2);
    for (auto _ : state) benchmark::DoNotOptimize(dtw_distance({x, n, kDim}, {y, n, kDim}));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_dtw)->DenseRange(10, 30, 5)->Arg(120)->Complexity(benchmark::oNSquared);

void BM_euclid_rbf(benchmark::State& state) {
    const auto n = std::size_t(state.range(0));
    const auto x = bench::walk(n, kDim, 1), y = bench::walk(n, kDim, 2);
    KernelParams p;
    p.nu = 0.05;
    for (auto _ : state) benchmark::DoNotOptimize(euclid_rbf_kernel({x, n, kDim}, {y, n, kDim}, p));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_euclid_rbf)->DenseRange(10, 30, 5)->Complexity(benchmark::oN);

}  // namespace
