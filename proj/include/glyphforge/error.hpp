#pragma once

#include <stdexcept>
#include <string>

namespace glyphforge {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data (glyph files, images, asset stores, configs).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Glyph file syntax error, tagged with the 1-based line number.
class ParseError : public DataError {
 public:
  ParseError(int line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line), detail_(what) {}
  int line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  int line_;
  std::string detail_;
};

/// Invalid argument or configuration value supplied by the caller.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace glyphforge
