#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gofscreen {

/// Base of every error raised by the library.  The CLI maps the concrete
/// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad options, incompatible arguments.  Exit code 1.
class UsageError : public Error {
 public:
  using Error::Error;
};

class InvalidConfiguration : public UsageError {
 public:
  using UsageError::UsageError;
};

/// Problems with the data itself.  Exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

class DegenerateCovariate : public DataError {
 public:
  using DataError::DataError;
};

class DomainError : public DataError {
 public:
  using DataError::DataError;
};

class SeparationError : public DataError {
 public:
  using DataError::DataError;
};

class BoundaryError : public DataError {
 public:
  using DataError::DataError;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Numerical failures.  Exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class SingularFit : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

}  // namespace gofscreen
