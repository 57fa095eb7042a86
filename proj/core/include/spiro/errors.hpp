#pragma once

#include <stdexcept>
#include <string>

namespace spiro {

// Argument outside the mathematical domain of an operation (|x| > 1 in a
// Legendre call, a pole passed to the gradient, |m| > l, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Invalid configuration or dimension mismatch detected before any work.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Base of every on-disk format failure. Subclasses let callers tell a
// version mismatch from a short file from a corrupted one.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class VersionMismatchError : public FormatError {
 public:
  using FormatError::FormatError;
};

class TruncationError : public FormatError {
 public:
  using FormatError::FormatError;
};

class ChecksumError : public FormatError {
 public:
  using FormatError::FormatError;
};

class MalformedError : public FormatError {
 public:
  using FormatError::FormatError;
};

// backward() called with a trace whose shapes no longer match the params.
class StaleTraceError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Training produced a NaN/Inf (loss or gradient).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace spiro
