#pragma once

#include <stdexcept>
#include <string>

namespace pontrol {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violates the documented domain of an input type.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A control value lies outside [0, 1).
class InvalidControl : public Error {
 public:
  using Error::Error;
};

/// Division by a vanishing population size (standard-incidence model).
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Positivity or finiteness was lost while stepping an ODE.
class IntegrationFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace pontrol
