#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include "nijkit/error.hpp"
#include "nijkit/jet.hpp"

namespace nijkit {

/// Dense row-major matrix over a scalar type (double or Jet2).
template <class T>
class BasicMatrix {
 public:
  BasicMatrix() = default;
  BasicMatrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  BasicMatrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionError("matrix data size does not match shape");
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<const T> data() const noexcept { return data_; }
  std::span<T> data() noexcept { return data_; }

  void swap_rows(std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t j = 0; j < cols_; ++j) std::swap((*this)(a, j), (*this)(b, j));
  }

  friend bool operator==(const BasicMatrix&, const BasicMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Matrix = BasicMatrix<double>;
using JetMatrix = BasicMatrix<Jet2>;

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(const Jet2& x) { return std::abs(x.value()); }

Matrix identity(std::size_t n);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
double max_abs(const Matrix& m);
double trace(const Matrix& m);
/// Determinant by partial-pivot elimination.
double determinant(const Matrix& m);
/// Inverse by partial-pivot Gauss-Jordan; throws DegeneratePoint when
/// |det| < det_epsilon.
Matrix inverse(const Matrix& m, double det_epsilon = 0.0);

/// Solves A X = B in place by Gaussian elimination with partial pivoting
/// (pivot chosen by magnitude of the value part). On return `b` holds X.
/// Returns the determinant of A. Throws DegeneratePoint when
/// |det A| < det_epsilon; A is left in an unspecified state.
template <class T>
T solve_in_place(BasicMatrix<T>& a, BasicMatrix<T>& b, double det_epsilon) {
  const std::size_t n = a.rows();
  if (n == 0 || a.cols() != n || b.rows() != n) throw DimensionError("solve: shape mismatch");
  auto value_of = [](const T& x) {
    if constexpr (std::is_same_v<T, double>) {
      return x;
    } else {
      return x.value();
    }
  };
  T det = a(0, 0) * 0.0 + 1.0;
  try {
    for (std::size_t col = 0; col < n; ++col) {
      std::size_t pivot = col;
      for (std::size_t r = col + 1; r < n; ++r) {
        if (magnitude(a(r, col)) > magnitude(a(pivot, col))) pivot = r;
      }
      if (pivot != col) {
        a.swap_rows(pivot, col);
        b.swap_rows(pivot, col);
        det = -det;
      }
      det = det * a(col, col);
      if (magnitude(a(col, col)) == 0.0) throw DegeneratePoint(0.0);
      for (std::size_t r = col + 1; r < n; ++r) {
        const T factor = a(r, col) / a(col, col);
        for (std::size_t c = col; c < n; ++c) a(r, c) -= factor * a(col, c);
        for (std::size_t c = 0; c < b.cols(); ++c) b(r, c) -= factor * b(col, c);
      }
    }
    if (magnitude(det) < det_epsilon) throw DegeneratePoint(value_of(det));
    for (std::size_t ri = n; ri-- > 0;) {
      for (std::size_t c = 0; c < b.cols(); ++c) {
        T acc = b(ri, c);
        for (std::size_t k = ri + 1; k < n; ++k) acc -= a(ri, k) * b(k, c);
        b(ri, c) = acc / a(ri, ri);
      }
    }
  } catch (const DenominatorVanishes&) {
    throw DegeneratePoint(value_of(det));
  }
  return det;
}

}  // namespace nijkit
