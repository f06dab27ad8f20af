#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hyperrigid {

// Base of every error thrown by the library. The CLI maps all of these to
// exit code 1 (domain/validation failure).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input outside the mathematical domain of an operation (NaN samples,
// sqrt of a negative number, non-Hermitian input, invalid weights, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Iterative method hit its iteration cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace hyperrigid
