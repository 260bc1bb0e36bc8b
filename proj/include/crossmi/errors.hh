// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <stdexcept>
#include <string>

namespace crossmi {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnknownVariableError : Error {
  using Error::Error;
};

struct TypeMismatchError : Error {
  using Error::Error;
};

struct OverlappingVarSetsError : Error {
  using Error::Error;
};

struct AccuracyError : Error {
  using Error::Error;
};

struct ConditionShapeError : Error {
  using Error::Error;
};

struct SameVariableError : Error {
  using Error::Error;
};

struct EmptyDatasetError : Error {
  using Error::Error;
};

struct StateSpaceTooLargeError : Error {
  using Error::Error;
};

struct NotNumericalError : Error {
  using Error::Error;
};

struct IngestError : Error {
  using Error::Error;
};

struct SerializationError : Error {
  using Error::Error;
};

// Parse failure with position info for diagnostics.
struct SyntaxError : Error {
  SyntaxError(int line, int column, const std::string& expected,
              const std::string& found)
      : Error("syntax error at " + std::to_string(line) + ":" +
              std::to_string(column) + ": expected " + expected + ", found " +
              found),
        line(line),
        column(column),
        expected(expected),
        found(found) {}
  int line;
  int column;
  std::string expected;
  std::string found;
};

}  // namespace crossmi
