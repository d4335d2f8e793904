#pragma once

#include <stdexcept>
#include <string>

namespace csiloc {

/// A link carries no detectable path; the RP/AP pair is unusable.
class OutageError : public std::runtime_error {
public:
    explicit OutageError(const std::string &msg) : std::runtime_error(msg) {}
};

/// Structural mismatch between data and the layout it claims to follow.
class SchemaError : public std::runtime_error {
public:
    explicit SchemaError(const std::string &msg) : std::runtime_error(msg) {}
};

/// A serialized document could not be read back (parse failure, version skew).
class LoadError : public std::runtime_error {
public:
    explicit LoadError(const std::string &msg) : std::runtime_error(msg) {}
};

/// A covariance or eigenproblem left its numeric validity envelope.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string &msg) : std::runtime_error(msg) {}
};

} // namespace csiloc
