#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gesturekit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (CSV row, JSON body). Carries the 1-based line when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Input parsed correctly but violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Model file is structurally broken (truncated, missing fields).
class FormatError : public Error {
 public:
  using Error::Error;
};

class UnsupportedVersionError : public FormatError {
 public:
  explicit UnsupportedVersionError(int version)
      : FormatError("unsupported model file version " + std::to_string(version)), version_(version) {}
  int version() const { return version_; }

 private:
  int version_;
};

}  // namespace gesturekit
