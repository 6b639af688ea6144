#pragma once

#include <stdexcept>
#include <string>

namespace ssm {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Argument or parameter value outside its declared support.
struct DomainError : Error {
  using Error::Error;
};

/// Malformed or impossible data (bad CSV, missing covariate, zero-probability
/// observation under a discrete model).
struct DataError : Error {
  using Error::Error;
};

/// Incompatible configuration: wrong backend for a model, invalid option combination.
struct ConfigError : Error {
  using Error::Error;
};

/// Numerical failure: singular innovation covariance, particle depletion,
/// indefinite curvature after regularization.
struct NumericalError : Error {
  using Error::Error;
};

}  // namespace ssm
