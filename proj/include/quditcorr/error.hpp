#pragma once

#include <stdexcept>
#include <string>

namespace quditcorr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes, supports or matrix sizes that do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A precondition on a scalar argument or configuration value was violated.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An iterative numerical method failed to reach its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace quditcorr
