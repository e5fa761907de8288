#pragma once

#include <stdexcept>
#include <string>

namespace swiss {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: wrong shapes, non-finite values, out-of-range indices.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

/// A vector that must be non-zero was zero (normalization, cosine distance).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// A class received no probability mass when computing centroids.
class EmptyClassError : public Error {
 public:
  explicit EmptyClassError(std::size_t cls)
      : Error("class " + std::to_string(cls) + " has zero probability mass"), cls_(cls) {}
  std::size_t cls() const { return cls_; }

 private:
  std::size_t cls_;
};

/// Dataset violates a training precondition (e.g. a class missing from the source).
class InvalidDatasetError : public Error {
 public:
  using Error::Error;
};

/// Text input (CSV, checkpoint) could not be parsed.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Configuration file problems: unknown keys, bad types, invalid values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace swiss
