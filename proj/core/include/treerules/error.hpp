#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace treerules {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user configuration: schema files, hyperparameters, flags.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data does not match the declared schema (missing column, etc.).
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Dataset-level problems such as an empty dataset or feature-count mismatch.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A model or interchange document violates a structural invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A rule set is internally inconsistent: zero or several rules fired for a tree.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace treerules
