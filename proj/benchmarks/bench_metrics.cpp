#include <benchmark/benchmark.h>

#include <random>

#include "storyverb/metrics.hpp"

using namespace storyverb;

namespace {

std::vector<Tokens> sentences(std::size_t count, std::size_t len, unsigned seed) {
    std::mt19937 rng(seed);
    std::vector<Tokens> out(count);
    for (auto& s : out)
        for (std::size_t i = 0; i < len; ++i) s.push_back("w" + std::to_string(rng() % 400));
    return out;
}

void BM_Bleu4(benchmark::State& state) {
    const auto len = static_cast<std::size_t>(state.range(0));
    const auto hyp = sentences(1, len, 1)[0];
    const auto refs = sentences(4, len, 2);
    for (auto _ : state) benchmark::DoNotOptimize(bleu_n(hyp, refs, 4));
}
BENCHMARK(BM_Bleu4)->Arg(20)->Arg(100)->Arg(400);

void BM_RougeL(benchmark::State& state) {
    const auto len = static_cast<std::size_t>(state.range(0));
    const auto a = sentences(1, len, 3)[0];
    const auto b = sentences(1, len, 4)[0];
    for (auto _ : state) benchmark::DoNotOptimize(rouge_l(a, b));
}
BENCHMARK(BM_RougeL)->Arg(20)->Arg(100)->Arg(400);

void BM_Meteor(benchmark::State& state) {
    const auto len = static_cast<std::size_t>(state.range(0));
    const auto a = sentences(1, len, 5)[0];
    const auto b = sentences(1, len, 6)[0];
    for (auto _ : state) benchmark::DoNotOptimize(meteor(a, b));
}
BENCHMARK(BM_Meteor)->Arg(20)->Arg(100);

void BM_CiderCorpus(benchmark::State& state) {
    const auto items = static_cast<std::size_t>(state.range(0));
    const auto hyps = sentences(items, 60, 7);
    std::vector<std::vector<Tokens>> refs;
    for (std::size_t i = 0; i < items; ++i) refs.push_back(sentences(2, 60, 100 + static_cast<unsigned>(i)));
    for (auto _ : state) benchmark::DoNotOptimize(cider(hyps, refs));
}
BENCHMARK(BM_CiderCorpus)->Arg(50)->Arg(500);

}  // namespace
