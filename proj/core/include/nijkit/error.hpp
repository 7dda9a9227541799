#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nijkit {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands of incompatible dimension, or an index outside its declared range.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A quotient whose denominator is numerically zero.
class DenominatorVanishes : public Error {
 public:
  explicit DenominatorVanishes(double denominator);
  double denominator() const noexcept { return denominator_; }

 private:
  double denominator_;
};

/// Argument outside the domain of a built-in function (e.g. sqrt of a negative).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Evaluation of operator entry (row, col) failed; indices are 0-based.
class SingularEntry : public Error {
 public:
  SingularEntry(std::size_t row, std::size_t col, double denominator);
  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }
  double denominator() const noexcept { return denominator_; }

 private:
  std::size_t row_;
  std::size_t col_;
  double denominator_;
};

/// The Jacobi matrix of the invariants is not invertible at the point.
class DegeneratePoint : public Error {
 public:
  explicit DegeneratePoint(double det);
  double det() const noexcept { return det_; }

 private:
  double det_;
};

/// Critical point of y -> f(x, y) with vanishing second derivative.
class NonMorseCritical : public Error {
 public:
  explicit NonMorseCritical(double second_derivative);
  double second_derivative() const noexcept { return second_derivative_; }

 private:
  double second_derivative_;
};

class NewtonDivergence : public Error {
 public:
  using Error::Error;
};

/// Every sampled point of a sweep was rejected.
class DomainEntirelySingular : public Error {
 public:
  using Error::Error;
};

/// Malformed argument to an operation (bad sample count, empty box, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace nijkit
