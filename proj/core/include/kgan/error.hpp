#pragma once

#include <stdexcept>
#include <string>

namespace kgan {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes do not fit the operation they are fed to.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A NaN or Inf appeared in a computed value.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// log() was asked for a nonpositive argument.
class LogDomainError : public Error {
 public:
  using Error::Error;
};

/// A log-ratio of the objective collapsed to zero (raise phi or sigma).
class UnderflowError : public Error {
 public:
  using Error::Error;
};

/// A precondition on a scalar or configuration argument failed.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed or unreadable file content.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace kgan
