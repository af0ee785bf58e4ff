#pragma once

#include <stdexcept>
#include <string>

namespace mg1fp {

struct SingularMatrix : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct PerronFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GuardExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parse failure in a text model/matrix file; `line` is 1-based.
struct ParseError : std::runtime_error {
    int line;
    ParseError(int line_, const std::string& what_)
        : std::runtime_error("line " + std::to_string(line_) + ": " + what_), line(line_) {}
};

} // namespace mg1fp
