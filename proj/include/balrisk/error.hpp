#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace balrisk {

// Root of every error the library throws. The CLI maps the subclasses onto
// exit codes: UsageError -> 1, DataError -> 2, DomainError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class EmptyDatasetError : public DataError {
 public:
  EmptyDatasetError() : DataError("dataset is empty") {}
  explicit EmptyDatasetError(const std::string& what) : DataError(what) {}
};

// Raised when an operation needs both classes and one of them is absent.
class DegenerateClassError : public DataError {
 public:
  using DataError::DataError;
};

class ParseError : public DataError {
 public:
  // row and column are 1-based; 0 means "not applicable".
  ParseError(const std::string& what, std::size_t row, std::size_t column = 0)
      : DataError(format(what, row, column)), row_(row), column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t row, std::size_t column) {
    std::string out = "row " + std::to_string(row);
    if (column > 0) out += ", column " + std::to_string(column);
    return out + ": " + what;
  }

  std::size_t row_;
  std::size_t column_;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

// Out-of-range numeric inputs (q outside (0,1), k > n, negative constants...).
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace balrisk
