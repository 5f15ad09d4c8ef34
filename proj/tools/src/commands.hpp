#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "storyverb/config.hpp"

namespace storyverb::cli {

struct Options {
    std::string verb;
    std::optional<std::filesystem::path> config;
    std::string dataset;
    std::optional<std::filesystem::path> data_root;
    std::string backend;
    int jobs = 1;
    std::optional<std::int64_t> seed;
    std::optional<std::filesystem::path> out;
    std::optional<std::filesystem::path> pred;
    std::optional<std::filesystem::path> stories;
    std::optional<std::filesystem::path> annotations;
    std::vector<std::string> tasks;
    double min_agreement = 0.6;
    std::string rule = "majority";
    std::string cache_action;
    std::vector<ConfigOverride> overrides;
};

// Each returns an exit code; fatal problems are thrown as storyverb::Error.
int cmd_verbalize(const Options& opts, std::ostream& out);
int cmd_story(const Options& opts, std::ostream& out);
int cmd_tasks(const Options& opts, std::ostream& out);
int cmd_evaluate(const Options& opts, std::ostream& out);
int cmd_aggregate(const Options& opts, std::ostream& out);
int cmd_stats(const Options& opts, std::ostream& out);
int cmd_cache(const Options& opts, std::ostream& out);

}  // namespace storyverb::cli
