#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace twostage {

/// Non-finite argument to a special function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Vector lengths that must agree do not.
class DimensionMismatch : public std::invalid_argument {
 public:
  DimensionMismatch(std::size_t expected, std::size_t actual)
      : std::invalid_argument("dimension mismatch: expected " + std::to_string(expected) +
                              ", got " + std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}

  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

/// A target the rectified model assigns zero probability (y < 0).
class InvalidTarget : public std::invalid_argument {
 public:
  InvalidTarget(std::size_t record, double value)
      : std::invalid_argument("invalid target " + std::to_string(value) + " at record " +
                              std::to_string(record) + ": rectified targets must be >= 0"),
        record_(record) {}

  std::size_t record() const noexcept { return record_; }

 private:
  std::size_t record_;
};

/// Malformed dataset or model file. Row and column are 1-based; 0 means "not applicable".
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t row = 0, std::size_t column = 0)
      : std::runtime_error(format(what, row, column)), row_(row), column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t row, std::size_t column) {
    std::string out = what;
    if (row != 0) out += " (row " + std::to_string(row);
    if (column != 0) out += (row != 0 ? ", column " : " (column ") + std::to_string(column);
    if (row != 0 || column != 0) out += ")";
    return out;
  }

  std::size_t row_;
  std::size_t column_;
};

/// Gradient training produced a non-finite weight.
class TrainingFailure : public std::runtime_error {
 public:
  TrainingFailure(const std::string& what, std::size_t epoch, std::string tag = {})
      : std::runtime_error((tag.empty() ? std::string{} : "[" + tag + "] ") + what + " at epoch " +
                           std::to_string(epoch)),
        epoch_(epoch),
        tag_(std::move(tag)) {}

  std::size_t epoch() const noexcept { return epoch_; }
  const std::string& tag() const noexcept { return tag_; }

 private:
  std::size_t epoch_;
  std::string tag_;
};

/// The SVR dual solver hit its iteration limit before satisfying KKT.
class ConvergenceFailure : public std::runtime_error {
 public:
  ConvergenceFailure(std::size_t iterations, double violation)
      : std::runtime_error("SVR solver did not converge after " + std::to_string(iterations) +
                           " iterations (max KKT violation " + std::to_string(violation) + ")"),
        iterations_(iterations),
        violation_(violation) {}

  std::size_t iterations() const noexcept { return iterations_; }
  double violation() const noexcept { return violation_; }

 private:
  std::size_t iterations_;
  double violation_;
};

}  // namespace twostage
