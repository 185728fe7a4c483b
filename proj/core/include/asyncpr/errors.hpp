#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace asyncpr {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Non-finite value handed to a routine that only admits finite reals.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Iterative eigen/singular value estimation did not settle within its cap.
/// The last estimate is kept so callers can still report something.
class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& what, double last_estimate,
                     std::size_t iterations)
      : Error(what), last_estimate_(last_estimate), iterations_(iterations) {}

  double last_estimate() const noexcept { return last_estimate_; }
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  double last_estimate_;
  std::size_t iterations_;
};

/// LU factorization hit a pivot below the singularity threshold.
class SingularSystemError : public Error {
 public:
  SingularSystemError(const std::string& what, double pivot, std::size_t column)
      : Error(what), pivot_(pivot), column_(column) {}

  double pivot() const noexcept { return pivot_; }
  std::size_t column() const noexcept { return column_; }

 private:
  double pivot_;
  std::size_t column_;
};

}  // namespace asyncpr
