#pragma once

#include <stdexcept>
#include <string>

namespace pluralis {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input document. `path` is a JSON pointer into it.
class ConfigError : public Error {
public:
    ConfigError(std::string path, const std::string& what)
        : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// Vector operands of different lengths.
class DimensionMismatch : public Error {
public:
    DimensionMismatch(std::size_t expected, std::size_t actual)
        : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
                std::to_string(actual)) {}
};

/// Argument outside the mathematical domain of a utility (e.g. NSW on a negative value).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Parameter invariants violated (weights not on the simplex, increasing GGF weights, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// An explicit size guard (enumeration count, simplex grid size) was exceeded.
class GuardExceeded : public Error {
public:
    using Error::Error;
};

/// Coverage set was not built from the supplied MOMDP.
class FingerprintMismatch : public Error {
public:
    using Error::Error;
};

class NotFound : public Error {
public:
    using Error::Error;
};

}  // namespace pluralis
