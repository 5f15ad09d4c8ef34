#include <benchmark/benchmark.h>

#include <random>

#include "storyverb/flow.hpp"

using namespace storyverb;

namespace {

Frame noise(int w, int h, int shift, unsigned seed) {
    std::mt19937 rng(seed);
    std::vector<std::uint8_t> canvas(static_cast<std::size_t>(w + 64) * h);
    for (auto& p : canvas) p = static_cast<std::uint8_t>(40 + rng() % 176);
    std::vector<std::uint8_t> luma(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            luma[static_cast<std::size_t>(y) * w + x] = canvas[static_cast<std::size_t>(y) * (w + 64) + x + shift];
    return make_gray_frame(w, h, std::move(luma));
}

void BM_FlowPan(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const auto a = noise(side, side, 0, 1);
    const auto b = noise(side, side, 3, 1);
    const BlockMatchingFlow flow;
    for (auto _ : state) benchmark::DoNotOptimize(flow.estimate(a, b));
    state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_FlowPan)->Arg(64)->Arg(160)->Arg(320);

void BM_FlowCut(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const auto a = noise(side, side, 0, 1);
    const auto b = noise(side, side, 0, 2);
    const BlockMatchingFlow flow;
    for (auto _ : state) benchmark::DoNotOptimize(flow.estimate(a, b));
    state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_FlowCut)->Arg(64)->Arg(160);

}  // namespace
