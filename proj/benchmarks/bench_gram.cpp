#include <benchmark/benchmark.h>

#include "common.hpp"
#include "ekm/gram.hpp"

namespace {

using namespace ekm;

constexpr std::size_t kDim = 15, kLength = 15;

struct Set {
    std::vector<std::vector<double>> store;
    std::vector<SeriesView> views;

    explicit Set(std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) store.push_back(bench::walk(kLength, kDim, 100 + i));
        for (const auto& s : store) views.push_back({s, kLength, kDim});
    }
};

void BM_gram_rdtw_normalized(benchmark::State& state) {
    const Set set(std::size_t(state.range(0)));
    KernelParams p;
    p.nu = 0.05;
    const auto workers = std::size_t(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(gram(set.views, KernelId::rdtw_normalized, p, workers));
}
BENCHMARK(BM_gram_rdtw_normalized)->Args({100, 1})->Args({100, 4})->Args({300, 1})->Unit(benchmark::kMillisecond);

void BM_cross_row(benchmark::State& state) {
    const Set train(std::size_t(state.range(0)));
    const Set probe(1);
    KernelParams p;
    p.nu = 0.05;
    const auto g = gram(train.views, KernelId::rdtw_normalized, p);
    for (auto _ : state)
        benchmark::DoNotOptimize(gram_cross(probe.views, train.views, KernelId::rdtw_normalized, p, g.norm_bounds));
}
BENCHMARK(BM_cross_row)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace
