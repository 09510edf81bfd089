#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace debtrank {

/// Base class for all errors raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Semantic rejection of otherwise well-formed input.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NonPositiveEquityError : public ValidationError {
 public:
  NonPositiveEquityError(std::string bank_id, double equity)
      : ValidationError("non-positive equity for bank '" + bank_id +
                        "': " + std::to_string(equity)),
        bank_id(std::move(bank_id)) {}
  std::string bank_id;
};

class NegativeExposureError : public ValidationError {
 public:
  NegativeExposureError(std::size_t lender, std::size_t borrower)
      : ValidationError("negative exposure at (" + std::to_string(lender) +
                        ", " + std::to_string(borrower) + ")"),
        lender(lender),
        borrower(borrower) {}
  std::size_t lender;
  std::size_t borrower;
};

class SelfLoopError : public ValidationError {
 public:
  explicit SelfLoopError(std::size_t bank)
      : ValidationError("self-exposure on diagonal at bank index " +
                        std::to_string(bank)),
        bank(bank) {}
  std::size_t bank;
};

class UnknownBankError : public Error {
 public:
  using Error::Error;
};

class NegativeAlphaError : public Error {
 public:
  using Error::Error;
};

class SingularSystemError : public Error {
 public:
  using Error::Error;
};

class ZeroTotalError : public Error {
 public:
  using Error::Error;
};

class NegativeZError : public Error {
 public:
  using Error::Error;
};

class UnachievableDensityError : public Error {
 public:
  using Error::Error;
};

/// A positive margin has no sampled links able to carry it.
class UnsupportedMarginError : public Error {
 public:
  enum class Direction { kAssets, kLiabilities };

  UnsupportedMarginError(std::size_t bank, Direction direction)
      : Error("margin unsupported by topology for bank index " +
              std::to_string(bank) +
              (direction == Direction::kAssets ? " (interbank assets)"
                                               : " (interbank liabilities)")),
        bank(bank),
        direction(direction) {}
  std::size_t bank;
  Direction direction;
};

class RasNotConvergedError : public Error {
 public:
  RasNotConvergedError(double residual, std::size_t iterations)
      : Error("RAS balancing did not converge after " +
              std::to_string(iterations) +
              " iterations (residual " + std::to_string(residual) + ")"),
        residual(residual),
        iterations(iterations) {}
  double residual;
  std::size_t iterations;
};

class ExhaustedRedrawsError : public Error {
 public:
  explicit ExhaustedRedrawsError(std::size_t sample)
      : Error("exhausted topology redraws for ensemble sample " +
              std::to_string(sample)),
        sample(sample) {}
  std::size_t sample;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& reason)
      : Error("parse error at line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + reason),
        line(line),
        column(column) {}
  std::size_t line;
  std::size_t column;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace debtrank
