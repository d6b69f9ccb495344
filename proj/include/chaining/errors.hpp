// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace chaining {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Request exceeds a documented computational cap (enumeration size, exact mode).
class ResourceError : public Error {
 public:
  using Error::Error;
};

// A checked precondition (regularity, sublinearity, domination) failed.
// The message carries the witness.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Structural validation of a user-supplied object (partition tree, config).
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace chaining
