#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace srl {

// Malformed input data (bad rows, inconsistent columns, broken fixtures).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// DataError carrying the 1-based line number of the offending input line.
class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Numeric failure: divergence, non-finite values, shape mismatches.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Usage-level misconfiguration (inconsistent specs, bad arguments).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace srl
