#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rankstab {

// Malformed or unreadable input data. Maps to CLI exit status 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A row-level parse failure that carries the 1-based line number of the
// offending record.
class ParseError : public InputError {
public:
    ParseError(std::size_t line, const std::string& message)
        : InputError("line " + std::to_string(line) + ": " + message), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Invalid configuration (flags, config files, alias maps). Exit status 3.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Filesystem or sink failure. Exit status 4.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rankstab
