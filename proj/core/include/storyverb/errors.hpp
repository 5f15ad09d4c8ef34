#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace storyverb {

// Broad failure classes. The CLI maps them onto process exit codes.
enum class ErrorKind { usage, config, backend, data, stage, integrity };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ConfigViolation {
    std::string field;
    std::string message;
};

class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<ConfigViolation> violations);
    ConfigError(std::string field, std::string message);
    const std::vector<ConfigViolation>& violations() const noexcept { return violations_; }

private:
    std::vector<ConfigViolation> violations_;
};

// A backend call failed. Transient failures are eligible for retry.
class BackendError : public Error {
public:
    BackendError(const std::string& what, bool transient)
        : Error(ErrorKind::backend, what), transient_(transient) {}
    bool transient() const noexcept { return transient_; }

private:
    bool transient_;
};

// Malformed input file. line is 1-based, 0 when not applicable.
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& message);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DatasetError : public Error {
public:
    explicit DatasetError(const std::string& what) : Error(ErrorKind::data, what) {}
};

// A pipeline stage could not produce any output for a video.
class StageError : public Error {
public:
    explicit StageError(const std::string& what) : Error(ErrorKind::stage, what) {}
};

class CorruptArtifact : public Error {
public:
    explicit CorruptArtifact(const std::string& what) : Error(ErrorKind::integrity, what) {}
};

}  // namespace storyverb
