#pragma once

#include <stdexcept>
#include <string>

namespace rdgof {

// Base of every error thrown by the library. The CLI maps the concrete
// subclasses onto its exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (bad labels, length mismatch, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

// A parameter lies outside the domain where the operation is defined.
class RangeError : public Error {
 public:
  using Error::Error;
};

// A numerical procedure failed to reach its accuracy target.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace rdgof
