#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace storyverb {

inline constexpr std::size_t kRetrievalOptions = 30;

// Uniform integer in [0, n) by rejection on a 64-bit engine. Unlike
// std::uniform_int_distribution the result is identical on every standard
// library.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n);

// 29 distractors drawn without replacement from `pool` (entries equal to the
// target or repeated are ignored) plus the target at a uniformly drawn
// position. Throws std::invalid_argument when fewer than 29 candidates remain.
std::vector<std::string> build_retrieval_options(const std::string& target,
                                                 const std::vector<std::string>& pool,
                                                 std::uint64_t rng_seed);

}  // namespace storyverb
