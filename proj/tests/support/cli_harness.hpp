#pragma once

#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "storyverb/text.hpp"
#include "storyverb_cli/cli.hpp"

namespace harness {

struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};

inline CliResult run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    CliResult r;
    r.code = storyverb::cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

// Relative path -> file bytes for every regular file under root.
inline std::map<std::string, std::string> read_tree(const std::filesystem::path& root) {
    std::map<std::string, std::string> files;
    if (!std::filesystem::exists(root)) return files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        files[std::filesystem::relative(e.path(), root).generic_string()] = storyverb::read_file(e.path().string());
    }
    return files;
}

inline std::filesystem::path fresh_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(p);
    return p;
}

}  // namespace harness
