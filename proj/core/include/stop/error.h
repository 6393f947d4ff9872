#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stop {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes that do not chain (mismatched inner dims, non-integral
// convolution outputs, indivisible pooling windows).
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Out-of-domain model parameters, e.g. a non-positive threshold.
class ParameterError : public Error {
 public:
  using Error::Error;
};

class EncodingError : public Error {
 public:
  using Error::Error;
};

class DecodingError : public Error {
 public:
  using Error::Error;
};

// A desired-output vector that is not exactly one-hot.
class TargetError : public Error {
 public:
  using Error::Error;
};

// Architecture string rejected by the parser. `position()` is the 0-based
// index of the offending dash-separated token.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " (token " + std::to_string(position) + ")"),
        position_(position) {}

  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// Malformed or unreadable input data (IDX, event streams, manifests).
class DataError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf during training or a gradient check outside tolerance.
class NumericError : public Error {
 public:
  using Error::Error;
};

class UnsupportedModeError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace stop
