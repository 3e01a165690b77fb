#pragma once

#include <stdexcept>
#include <string>

namespace ocm3d {

// Base for every error raised by the library. The CLI maps these to exit 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input is structurally wrong (missing key, wrong raster type, missing score).
class FormatError : public Error {
 public:
  using Error::Error;
};

// A token could not be read; carries the 1-based position when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column = 0)
      : Error(what), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Precondition on a numeric argument violated (depth <= 0, empty input...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class BehindCameraError : public DomainError {
 public:
  using DomainError::DomainError;
};

class EmptyRoiError : public DomainError {
 public:
  using DomainError::DomainError;
};

class DegenerateGridError : public DomainError {
 public:
  using DomainError::DomainError;
};

// A record is well formed but semantically invalid (e.g. non-positive dims).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Two inputs disagree with each other (unmapped frame, orphan detection file).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace ocm3d
