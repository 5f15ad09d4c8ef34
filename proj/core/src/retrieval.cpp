#include "storyverb/retrieval.hpp"

#include <limits>
#include <set>
#include <stdexcept>

namespace storyverb {

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_below(0)");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

std::vector<std::string> build_retrieval_options(const std::string& target,
                                                 const std::vector<std::string>& pool,
                                                 std::uint64_t rng_seed) {
    std::vector<std::string> candidates;
    std::set<std::string> seen{target};
    for (const auto& p : pool) {
        if (seen.insert(p).second) candidates.push_back(p);
    }
    constexpr std::size_t k = kRetrievalOptions - 1;
    if (candidates.size() < k) {
        throw std::invalid_argument("retrieval pool has " + std::to_string(candidates.size()) +
                                    " distinct distractors, need " + std::to_string(k));
    }
    std::mt19937_64 rng(rng_seed);
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + uniform_below(rng, candidates.size() - i);
        std::swap(candidates[i], candidates[j]);
    }
    candidates.resize(k);
    const auto pos = uniform_below(rng, kRetrievalOptions);
    candidates.insert(candidates.begin() + static_cast<std::ptrdiff_t>(pos), target);
    return candidates;
}

}  // namespace storyverb
