#pragma once

#include <stdexcept>
#include <string>

namespace nonstat {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A computation received fewer samples than it needs.
struct TooFewSamples : Error {
  using Error::Error;
};

/// A covariance matrix is singular or not positive definite.
struct SingularCovariance : Error {
  using Error::Error;
};

/// Matrix or vector dimensions do not agree.
struct DimensionMismatch : Error {
  using Error::Error;
};

/// A scalar argument lies outside the domain of the function.
struct DomainError : Error {
  using Error::Error;
};

/// A requested subspace dimension is out of range.
struct InvalidDimension : Error {
  using Error::Error;
};

/// A generic argument check failed.
struct InvalidArgument : Error {
  using Error::Error;
};

/// A cluster count is out of range for the given data.
struct InvalidK : Error {
  using Error::Error;
};

/// A variance estimate collapsed to (near) zero.
struct DegenerateVariance : Error {
  using Error::Error;
};

/// A vector that must be nonzero is (near) zero.
struct ZeroVector : Error {
  using Error::Error;
};

/// Class statistics admit no separating direction.
struct DegenerateSeparation : Error {
  using Error::Error;
};

/// An evaluation needs at least one true change point.
struct NoTrueBoundaries : Error {
  using Error::Error;
};

/// Parameters of a synthetic data variant are inconsistent.
struct InvalidVariantParams : Error {
  using Error::Error;
};

}  // namespace nonstat
