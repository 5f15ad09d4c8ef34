#include <benchmark/benchmark.h>

#include <random>

#include "storyverb/prompt.hpp"

using namespace storyverb;

namespace {

void BM_DedupCaptions(benchmark::State& state) {
    std::mt19937 rng(9);
    const std::vector<std::string> words{"a", "man", "woman", "dog", "runs", "on", "the", "beach", "park", "city",
                                         "street", "at", "night", "smiling", "holding", "bottle"};
    std::vector<std::string> captions;
    for (int i = 0; i < state.range(0); ++i) {
        std::string c;
        for (int k = 0; k < 10; ++k) c += words[rng() % words.size()] + " ";
        captions.push_back(c);
    }
    for (auto _ : state) benchmark::DoNotOptimize(dedup_texts(captions, 0.8));
}
BENCHMARK(BM_DedupCaptions)->Arg(10)->Arg(40)->Arg(160);

}  // namespace
