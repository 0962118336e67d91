#pragma once

#include <stdexcept>
#include <string>

namespace inlite {

// Base of every error raised by the library. Callers that only care about
// success/failure can catch this; the CLI maps the subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed formula, model file or configuration text.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(what + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Missing columns, bad indices, invalid observations.
class DataError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// Raised by the Cholesky factorization; pivot is in the permuted order.
class NotPositiveDefinite : public NumericalError {
 public:
  NotPositiveDefinite(int pivot, double value)
      : NumericalError("matrix is not positive definite: pivot " +
                       std::to_string(pivot) + " has value " +
                       std::to_string(value)),
        pivot_(pivot) {}

  int pivot() const { return pivot_; }

 private:
  int pivot_;
};

class ConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace inlite
