#pragma once

#include <stdexcept>
#include <string>

namespace awp {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid construction parameters (odd grid size, negative distance, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Operands live on incompatible grids.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A feature is not resolved by the sampling grid.
class SamplingError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

}  // namespace awp
