#include "storyverb/errors.hpp"

namespace storyverb {

namespace {

std::string describe(const std::vector<ConfigViolation>& violations) {
    std::string out = "invalid configuration:";
    for (const auto& v : violations) {
        out += " ";
        out += v.field;
        out += ": ";
        out += v.message;
        out += ";";
    }
    if (!violations.empty()) out.pop_back();
    return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigViolation> violations)
    : Error(ErrorKind::config, describe(violations)), violations_(std::move(violations)) {}

ConfigError::ConfigError(std::string field, std::string message)
    : ConfigError(std::vector<ConfigViolation>{{std::move(field), std::move(message)}}) {}

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& message)
    : Error(ErrorKind::data,
            line > 0 ? source + ":" + std::to_string(line) + ": " + message : source + ": " + message),
      line_(line) {}

}  // namespace storyverb
