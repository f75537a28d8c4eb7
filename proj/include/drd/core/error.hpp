#pragma once

#include <stdexcept>
#include <string>

namespace drd {

/// Base of every error raised by the library. The CLI maps each subclass to
/// a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes that do not line up (wrong axis length, bad broadcast).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid hyperparameters or settings.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// API misuse, e.g. backward() on a non-scalar.
class UsageError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A checkpoint file that is truncated, has a bad magic, or a bad version.
class CheckpointFormatError : public IoError {
 public:
  using IoError::IoError;
};

/// Persisted state that does not fit the network it is loaded into.
class CompatibilityError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf detected during training.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace drd
