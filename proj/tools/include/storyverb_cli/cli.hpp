#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace storyverb::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kConfig = 2,
    kBackend = 3,
    kPartial = 4,
};

// args excludes the program name. Data goes to `out`, error lines to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace storyverb::cli
