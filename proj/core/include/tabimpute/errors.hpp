#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace tabimpute {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed CSV input. `line()` is the 1-based physical line of the
/// offending record (0 when not tied to a line).
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A configuration value outside its legal range, an unknown key, or an
/// otherwise unusable user-supplied setting. `parameter()` names the
/// offending setting using the ImputeConfig field name.
class ValidationError : public Error {
public:
    ValidationError(std::string parameter, const std::string& what)
        : Error(what), parameter_(std::move(parameter)) {}
    const std::string& parameter() const noexcept { return parameter_; }

private:
    std::string parameter_;
};

/// Data that violates an operation's precondition (shape mismatch, a
/// column with no observed values, an unknown label, ...).
class DataError : public Error {
public:
    using Error::Error;
};

} // namespace tabimpute
