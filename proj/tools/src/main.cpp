#include <iostream>

#include "storyverb_cli/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return storyverb::cli::run(args, std::cout, std::cerr);
}
