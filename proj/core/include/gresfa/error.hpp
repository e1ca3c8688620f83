#pragma once

#include <stdexcept>
#include <string>

namespace gresfa {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A covariance matrix that should be positive definite is not.
class DegenerateCovarianceError : public Error {
 public:
  using Error::Error;
};

/// Manifest-variable or parameter index outside its valid range.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// Shapes of matrices or vectors do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A ModelSpec violates a hard invariant.
class SpecError : public Error {
 public:
  using Error::Error;
};

/// Data cannot be used for estimation (zero variance, empty, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// The information matrix is numerically singular.
class IdentificationError : public Error {
 public:
  using Error::Error;
};

/// Requested summary degrees of freedom exceed the numerical rank.
class RankError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or incomplete run configuration.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// A fit that did not converge was passed where a converged one is required.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace gresfa
