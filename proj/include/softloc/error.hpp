#pragma once

#include <stdexcept>
#include <string>

namespace softloc {

/// Base for every error raised by the library. The CLI maps subclasses onto
/// exit codes (validation errors -> 2, everything else -> 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments or configuration detected before any work is done.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class InvalidIndexError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptyInputError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ShapeMismatchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Failures that only show up while running (I/O, divergence, corrupt files).
class RuntimeFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace softloc
