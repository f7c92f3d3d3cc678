#pragma once

#include <stdexcept>
#include <string>

namespace rlab {

/// Error taxonomy mirrored by the CLI exit codes:
/// validation -> 1, numeric -> 2, io -> 3.
class Error : public std::runtime_error {
public:
    enum class Kind { validation, numeric, io };

    Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Bad sizes, out-of-range parameters, malformed input, violated preconditions.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(Kind::validation, what) {}
};

/// Conditioning failures, non-convergent quadrature, near-singular denominators.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(Kind::numeric, what) {}
};

/// File and serialization failures, schema mismatches.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(Kind::io, what) {}
};

} // namespace rlab
