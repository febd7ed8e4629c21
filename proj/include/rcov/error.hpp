#pragma once

#include <stdexcept>
#include <string>

namespace rcov {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A Cholesky pivot was not strictly positive. Signals a non-PSD input.
class FactorizationFailure : public Error {
 public:
  using Error::Error;
};

/// Not enough observations for the requested batch schedule.
class SampleTooSmall : public Error {
 public:
  using Error::Error;
};

/// Confidence level outside (0, 1].
class InvalidConfidence : public Error {
 public:
  using Error::Error;
};

/// Zero matrix or similar input for which the quantity is undefined.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class InvalidRange : public Error {
 public:
  using Error::Error;
};

class InvalidEpsilon : public Error {
 public:
  using Error::Error;
};

/// Unsupported or inconsistent distribution specification.
class InvalidSpec : public Error {
 public:
  using Error::Error;
};

/// Shapes that do not line up, non-finite entries, malformed input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent estimator configuration (e.g. lambda > L).
class InvalidConfig : public Error {
 public:
  using Error::Error;
};

}  // namespace rcov
