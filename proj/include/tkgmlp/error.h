#pragma once

#include <stdexcept>
#include <string>

namespace tkgmlp {

// Base of every error raised by the library. The CLI maps ConfigError to
// exit code 1 and everything else to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand dimensions do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Input values violate an operation's precondition (labels outside {0,1},
// non-finite entries, invalid rates).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Value outside the mathematical domain of an operator (CLR on a
// non-positive component, inverted range).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Operation is undefined for the given data, e.g. a metric on single-class
// labels or a batch-norm training step on one row.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf produced during optimization.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration, unknown keys, bad command-line usage.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// File-system and parse errors.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tkgmlp
