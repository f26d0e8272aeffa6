#pragma once

#include <stdexcept>
#include <string>

namespace arrivallab {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An eigenvalue of a curvature argument left the working cone.
class NonPositiveCurvature : public Error {
 public:
  using Error::Error;
};

/// A speed evaluated to a non-positive value inside the positive cone.
class NonPositiveSpeed : public Error {
 public:
  using Error::Error;
};

/// Radius of curvature h'' + h dropped to (or below) the convexity floor.
class ConvexityLost : public Error {
 public:
  using Error::Error;
};

/// The requested time step cannot be met within the stability bound.
class StabilityViolation : public Error {
 public:
  using Error::Error;
};

/// Arrival-time bracketing failed, i.e. containment is not monotone in time.
class NonMonotoneContainment : public Error {
 public:
  using Error::Error;
};

/// |Du| fell below the gradient floor where a level-set quantity was requested.
class DegenerateGradient : public Error {
 public:
  using Error::Error;
};

/// A query touched a cell excluded by the field mask.
class MaskedPoint : public Error {
 public:
  using Error::Error;
};

/// A cone segment endpoint is not positive definite.
class InvalidSegment : public Error {
 public:
  using Error::Error;
};

/// Malformed or unknown configuration input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace arrivallab
