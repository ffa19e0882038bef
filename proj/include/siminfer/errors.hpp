#pragma once

#include <stdexcept>
#include <string>

namespace siminfer {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A required CSV column or manifest field is missing.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// A value could not be parsed; carries the 1-based data row when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row = 0) : Error(what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Input violates a documented precondition (group sizes, labels, ranges).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A computation produced an inconsistent result or could not converge.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The requested combinatorial size is above the exact-enumeration limit.
class EnumerationLimitError : public Error {
 public:
  using Error::Error;
};

}  // namespace siminfer
