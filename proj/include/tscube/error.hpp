// tscube/error.hpp - error type shared by all tscube components.
#pragma once

#include <stdexcept>
#include <string>

namespace tscube {

// Broad failure classes; the CLI maps every kind to exit code 2.
enum class ErrorKind {
    Parse,      // malformed XML input
    Structure,  // document violates a structural invariant
    Lookup,     // an id or column was not found
    Type,       // operation applied to a column of the wrong datatype
    Value,      // bad value (empty input, degenerate distribution, ...)
    Io,         // file could not be read or written
    Usage,      // bad arguments to an operation
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message, int line = 0, int column = 0)
        : std::runtime_error(std::move(message)), kind_(kind), line_(line), column_(column) {}

    ErrorKind kind() const { return kind_; }

    // 1-based position in the input; 0 when not applicable.
    int line() const { return line_; }
    int column() const { return column_; }

private:
    ErrorKind kind_;
    int line_;
    int column_;
};

}  // namespace tscube
