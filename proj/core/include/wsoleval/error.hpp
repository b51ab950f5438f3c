#pragma once

#include <stdexcept>
#include <string>

namespace wsoleval {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller passed a value outside an operation's domain (bad tau, zero-area box, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Input data violates a schema or a precondition on its contents.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace wsoleval
