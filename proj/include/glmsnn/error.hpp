#pragma once

#include <stdexcept>
#include <string>

namespace glmsnn {

/// Base of every error thrown by the library. The CLI maps each subclass to
/// its own exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed on-disk data (bad magic, bad header, unparseable checkpoint).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Two inputs that must agree do not (image/label counts, checkpoint vs config).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A request exceeds what the data or an enumeration budget can supply.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Vector/matrix dimensions disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Non-finite value encountered during training or gradient probing.
class NumericError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace glmsnn
