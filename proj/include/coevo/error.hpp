#pragma once

#include <stdexcept>
#include <string>

namespace coevo {

/// Process exit codes used by the CLI.
enum class ExitCode : int {
    Ok = 0,
    Config = 2,
    Input = 3,
    Numerical = 4,
};

class Error : public std::runtime_error {
public:
    Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

/// Invalid configuration or arguments; raised before any work is done where possible.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ExitCode::Config, what) {}
};

/// Unreadable or malformed input data.
class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error(ExitCode::Input, what) {}
};

/// Parse failure tied to a 1-based line of the input stream.
class ParseError : public InputError {
public:
    ParseError(std::size_t line, const std::string& what)
        : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A computation could not produce a meaningful value (degenerate data, failed search, deadlock).
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ExitCode::Numerical, what) {}
};

}  // namespace coevo
