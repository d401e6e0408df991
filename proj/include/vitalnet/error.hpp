#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vitalnet {

// Base for every error raised by the library. The CLI maps any of these to
// exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates a documented invariant (bad vitals, impossible config, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed text input. `line` is 1-based; 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Tensor or sequence dimensions do not fit the operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Statistic is undefined for the given data (constant input, single class).
class UndefinedStatistic : public Error {
 public:
  using Error::Error;
};

}  // namespace vitalnet
