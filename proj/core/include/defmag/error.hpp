#pragma once

#include <stdexcept>
#include <string>

namespace defmag {

/// Base class of every error raised by the library. The CLI maps the
/// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments or configuration supplied by the caller.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (files, meshes, dimensions).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Malformed text in a file, with the offending line number.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A numerical procedure could not produce a well-defined result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace defmag
