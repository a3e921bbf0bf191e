#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace covering {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by the family-spec and scenario readers. `line` and `column` are
/// 1-based; both are 0 when the problem concerns the document as a whole
/// (e.g. a gate cycle).
class ParseError : public Error {
public:
    enum class Kind { syntax, unknown_id, duplicate_id, missing_id, cycle, alpha_range, invalid_value };

    ParseError(Kind kind, std::size_t line, std::size_t column, const std::string& what)
        : Error(format(line, column, what)), kind_(kind), line_(line), column_(column) {}

    Kind kind() const noexcept { return kind_; }
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    static std::string format(std::size_t line, std::size_t column, const std::string& what) {
        if (line == 0) return what;
        return std::to_string(line) + ":" + std::to_string(column) + ": " + what;
    }

    Kind kind_;
    std::size_t line_;
    std::size_t column_;
};

/// A caller broke an operation's precondition (mismatched dimensions,
/// malformed local-test arguments, ...).
class UsageError : public Error {
public:
    using Error::Error;
};

/// The requested procedure is not admissible without an explicit
/// acknowledgment from the caller.
class RefusedError : public Error {
public:
    using Error::Error;
};

class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

class InternalError : public Error {
public:
    using Error::Error;
};

}  // namespace covering
