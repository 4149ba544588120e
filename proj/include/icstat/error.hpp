#pragma once

#include <stdexcept>
#include <string>

namespace icstat {

// Base class for every error the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A required column is missing or the column layout is inconsistent.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A cell could not be parsed; the message carries the 1-based file row.
class CsvParseError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

// A statistic is degenerate: zero null variance, collapsed residual scale,
// correlation of a zero-variance component, and similar dead ends.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// Singular or numerically rank-deficient design.
class RankError : public Error {
 public:
  using Error::Error;
};

}  // namespace icstat
