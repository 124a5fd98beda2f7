#pragma once

#include <stdexcept>
#include <string>

namespace cep {

// I/O failures: unreadable files, unwritable outputs.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Structurally broken inputs (e.g. a dump where most lines fail to parse).
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Violated preconditions and malformed arguments.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user configuration (regex that does not compile, schema violations).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Operations invoked on objects in the wrong state (e.g. explaining an
// untrained model).
struct StateError : std::runtime_error {
    explicit StateError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace cep
