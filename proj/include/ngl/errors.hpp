#pragma once

#include <stdexcept>
#include <string>

namespace ngl {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the operation's precondition (non-finite input, bad size).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public InvalidInput {
 public:
  DimensionMismatch(std::size_t expected, std::size_t actual)
      : InvalidInput("dimension mismatch: expected " + std::to_string(expected) +
                     ", got " + std::to_string(actual)) {}
};

// A theorem hypothesis does not hold for the requested constants; the message
// names the violated hypothesis.
class HypothesisViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace ngl
