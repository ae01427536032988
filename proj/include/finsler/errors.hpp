#pragma once

#include <stdexcept>
#include <string>

namespace finsler {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument left the domain where the metric (or one of its pieces) is
/// defined: y = 0, |s| > b, b >= b0, a singular family evaluated at s <= 0.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be inverted is singular (a_ij, g_ij).
class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

/// One of the regularity denominators vanished, or a tensor that must be
/// positive definite is not.
class RegularityError : public Error {
 public:
  using Error::Error;
};

/// A routine was called outside its documented precondition, e.g. the
/// conformal spray on a one-form that is not closed and conformal.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Quadrature or ODE integration failed to converge or left its domain.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

}  // namespace finsler
