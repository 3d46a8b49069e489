#pragma once

#include <stdexcept>
#include <string>

namespace cevlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated an operation's precondition (bad parameter, wrong class of input).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure (quadrature, bisection, limit detection) did not reach its tolerance.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A registry lookup (function, model or spectral spec string) failed.
class SpecError : public Error {
 public:
  using Error::Error;
};

}  // namespace cevlab
