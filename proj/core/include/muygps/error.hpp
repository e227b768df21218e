#pragma once

#include <stdexcept>
#include <string>

namespace muygps {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file (CSV cell, model container, report).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A caller-supplied value violates an operation's precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Factorization failed even after bounded diagonal jitter.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace muygps
