#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mphate {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violates a documented invariant or precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Bad magic or malformed structure in a serialized stream.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A stream ended before the declared payload was read.
class LengthError : public Error {
 public:
  using Error::Error;
};

/// Declared sizes disagree with each other or with the payload.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A (epoch, unit) activation row has (near) zero variance over the probe set.
class DegenerateUnitError : public Error {
 public:
  DegenerateUnitError(std::size_t epoch, std::size_t unit)
      : Error("degenerate unit: zero-variance activations at epoch " + std::to_string(epoch) +
              ", unit " + std::to_string(unit)),
        epoch_(epoch),
        unit_(unit) {}

  std::size_t epoch() const noexcept { return epoch_; }
  std::size_t unit() const noexcept { return unit_; }

 private:
  std::size_t epoch_;
  std::size_t unit_;
};

/// A kernel bandwidth collapsed to zero.
class DegenerateBandwidthError : public Error {
 public:
  using Error::Error;
};

/// A node of the kernel graph has zero degree.
class DisconnectedNodeError : public Error {
 public:
  using Error::Error;
};

/// A graph needed to be connected and was not.
class ConnectivityError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Rank correlation of a constant sequence.
class UndefinedCorrelationError : public Error {
 public:
  using Error::Error;
};

}  // namespace mphate
