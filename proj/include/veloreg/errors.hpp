#pragma once

#include <stdexcept>
#include <string>

namespace veloreg {

/// Machine-readable error categories surfaced as CLI exit codes.
enum class ErrorCategory {
    io = 2,
    format = 3,
    argument = 4,
    numerics = 5,
    convergence = 6,
    resource = 7,
    logic = 8,
};

inline const char* to_string(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::io: return "io";
        case ErrorCategory::format: return "format";
        case ErrorCategory::argument: return "argument";
        case ErrorCategory::numerics: return "numerics";
        case ErrorCategory::convergence: return "convergence";
        case ErrorCategory::resource: return "resource";
        case ErrorCategory::logic: return "logic";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCategory cat, const std::string& msg)
        : std::runtime_error(msg), cat_(cat) {}
    ErrorCategory category() const { return cat_; }

private:
    ErrorCategory cat_;
};

struct IoError : Error {
    explicit IoError(const std::string& m) : Error(ErrorCategory::io, m) {}
};
struct FormatError : Error {
    explicit FormatError(const std::string& m) : Error(ErrorCategory::format, m) {}
};
/// Bad user-facing arguments (flags, parameter ranges) and contract violations
/// like grid mismatches between operands.
struct ArgumentError : Error {
    explicit ArgumentError(const std::string& m) : Error(ErrorCategory::argument, m) {}
};
struct DimensionError : ArgumentError {
    explicit DimensionError(const std::string& m) : ArgumentError(m) {}
};
struct NumericError : Error {
    explicit NumericError(const std::string& m) : Error(ErrorCategory::numerics, m) {}
};
struct ConvergenceError : Error {
    explicit ConvergenceError(const std::string& m) : Error(ErrorCategory::convergence, m) {}
};
struct ResourceError : Error {
    explicit ResourceError(const std::string& m) : Error(ErrorCategory::resource, m) {}
};
struct LogicError : Error {
    explicit LogicError(const std::string& m) : Error(ErrorCategory::logic, m) {}
};

} // namespace veloreg
