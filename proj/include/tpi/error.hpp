#pragma once

#include <stdexcept>
#include <string>

namespace tpi {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A parameter set violates a type invariant (negative rate, R+T != 1, ...).
class ValidationError : public Error {
public:
  using Error::Error;
};

// An operation was called outside its documented domain.
class PreconditionError : public Error {
public:
  using Error::Error;
};

// Division by zero, vanishing denominator, or a threshold with no solution.
class DegenerateError : public Error {
public:
  using Error::Error;
};

// Requested output would exceed the supported size.
class CapacityError : public Error {
public:
  using Error::Error;
};

// Timestamps that are not strictly increasing.
class UnsortedInputError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class CounterOverflowError : public Error {
public:
  using Error::Error;
};

// Bad command-line usage: unknown preset, missing argument, ...
class UsageError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

enum class FormatErrorKind { MalformedHeader, TruncatedRecord, NonMonotonicTimestamp };

inline const char* to_string(FormatErrorKind kind) {
  switch (kind) {
    case FormatErrorKind::MalformedHeader: return "malformed header";
    case FormatErrorKind::TruncatedRecord: return "truncated record";
    case FormatErrorKind::NonMonotonicTimestamp: return "non-monotonic timestamp";
  }
  return "format error";
}

// Tag file content does not match the documented layout.
class FormatError : public Error {
public:
  FormatError(FormatErrorKind kind, const std::string& what)
      : Error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  FormatErrorKind kind() const noexcept { return kind_; }

private:
  FormatErrorKind kind_;
};

}  // namespace tpi
