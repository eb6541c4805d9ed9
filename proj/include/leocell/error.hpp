#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace leocell {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed files, invariant violations, unmet preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure of an otherwise valid request.
class NumericError : public Error {
 public:
  using Error::Error;
};

class RankDeficientError : public NumericError {
 public:
  RankDeficientError(std::string column, const std::string& what)
      : NumericError(what), column_(std::move(column)) {}

  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

class DivergenceError : public NumericError {
 public:
  DivergenceError(std::int64_t epoch, const std::string& what)
      : NumericError(what), epoch_(epoch) {}

  std::int64_t epoch() const noexcept { return epoch_; }

 private:
  std::int64_t epoch_;
};

}  // namespace leocell
