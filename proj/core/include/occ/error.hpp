#pragma once

#include <stdexcept>
#include <string>

namespace occ {

/// Root of every exception thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not compose.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A precondition on values (range, finiteness, emptiness) was violated.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The request is well-formed but the model configuration cannot serve it.
class UnsupportedConfigError : public Error {
 public:
  using Error::Error;
};

/// Reading a dataset failed; the message carries the file location.
class IngestionError : public Error {
 public:
  using Error::Error;
};

/// Optimization produced a non-finite value.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace occ
