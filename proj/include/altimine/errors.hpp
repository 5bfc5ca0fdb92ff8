#pragma once

#include <stdexcept>
#include <string>

namespace altimine {

/// Input violates a documented contract (bad values, unknown class, duplicate ids...).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed file content (truncated binary, bad PLY header, bad label line).
class FormatError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Filesystem failure. The message carries the path and the OS cause.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace altimine
