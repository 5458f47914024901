#pragma once

#include <exception>
#include <string>
#include <utility>

namespace sdfm {

// Root of the library's exception hierarchy. The three direct children map
// onto the CLI exit codes: SpecError -> 2, DataError -> 3, NumericalError -> 4.
class Error : public std::exception {
 public:
  explicit Error(std::string message) : message_(std::move(message)) {}
  const char* what() const noexcept override { return message_.c_str(); }

  // Prepends caller context (e.g. "station s03, t=61") to the message.
  // Used with catch-by-reference + rethrow so the concrete type survives.
  void add_context(const std::string& context) {
    message_ = context + ": " + message_;
  }

 private:
  std::string message_;
};

// Invalid configuration or misuse of an operation's contract.
class SpecError : public Error {
  using Error::Error;
};

// Problems with the data itself (shape, gaps, missing values, parsing).
class DataError : public Error {
  using Error::Error;
};

// Numerical failures (eigen solvers, constraint violations, fit breakdown).
class NumericalError : public Error {
  using Error::Error;
};

class GapInTimeIndex : public DataError {
  using DataError::DataError;
};

class DuplicateTimestamp : public DataError {
  using DataError::DataError;
};

class ParseError : public DataError {
  using DataError::DataError;
};

class MissingDataError : public DataError {
  using DataError::DataError;
};

class DegenerateSeriesError : public DataError {
  using DataError::DataError;
};

class ShapeError : public DataError {
  using DataError::DataError;
};

class LengthError : public DataError {
  using DataError::DataError;
};

class InsufficientHistory : public DataError {
  using DataError::DataError;
};

class InsufficientFuture : public DataError {
  using DataError::DataError;
};

class SequentialOrderViolation : public DataError {
  using DataError::DataError;
};

class FirstObservationMissing : public DataError {
  using DataError::DataError;
};

class LagTooLarge : public SpecError {
  using SpecError::SpecError;
};

class SymmetryError : public NumericalError {
  using NumericalError::NumericalError;
};

class ConstraintError : public NumericalError {
  using NumericalError::NumericalError;
};

class FitError : public NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace sdfm
