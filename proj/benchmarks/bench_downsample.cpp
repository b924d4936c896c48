#include <benchmark/benchmark.h>

#include "common.hpp"
#include "ekm/downsample.hpp"

namespace {

using namespace ekm;

constexpr std::size_t kDim = 15;

void BM_greedy(benchmark::State& state) {
    const auto T = std::size_t(state.range(0));
    const auto x = bench::walk(T, kDim, 3);
    for (auto _ : state) benchmark::DoNotOptimize(adaptive_plan_greedy(SeriesView{x, T, kDim}, 15));
}
BENCHMARK(BM_greedy)->Arg(40)->Arg(120)->Arg(480);

void BM_optimal(benchmark::State& state) {
    const auto T = std::size_t(state.range(0));
    const auto x = bench::walk(T, kDim, 3);
    for (auto _ : state) benchmark::DoNotOptimize(adaptive_plan_optimal(SeriesView{x, T, kDim}, 15));
}
BENCHMARK(BM_optimal)->Arg(40)->Arg(120)->Arg(240);

void BM_uniform(benchmark::State& state) {
    const auto T = std::size_t(state.range(0));
    const auto x = bench::walk(T, kDim, 3);
    for (auto _ : state) benchmark::DoNotOptimize(uniform_plan(SeriesView{x, T, kDim}, 15));
}
BENCHMARK(BM_uniform)->Arg(120);

}  // namespace
