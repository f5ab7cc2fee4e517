#pragma once

#include <stdexcept>
#include <string>

namespace xling {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad file contents, shape disagreement, precondition failure.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// File-system or network failure.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown (non-finite objective, failed decomposition).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace xling
