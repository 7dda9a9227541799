#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace nijkit {

/// Relative threshold below which a denominator is treated as zero:
/// |b| <= kDivEpsilon * max(1, |numerator|).
inline constexpr double kDivEpsilon = 1e-12;

/// Second-order jet of a scalar quantity at a point: value, gradient and
/// Hessian with respect to the n coordinates.
///
/// The Hessian is stored as a full n x n row-major matrix and every
/// operation writes the upper triangle and mirrors it, so symmetry is exact.
///
/// A jet obtained by differentiating another jet (see partial()) carries a
/// correct value and gradient, but its Hessian would need third derivatives
/// and is not tracked. Such jets report second_order() == false, and so does
/// anything computed from them.
class Jet2 {
 public:
  Jet2() = default;

  /// Constant jet of dimension n.
  static Jet2 constant(double value, std::size_t n);

  /// Coordinate function x_index (0-based) evaluated at p.
  static Jet2 coordinate(std::size_t index, std::span<const double> p);

  /// Builds a jet from explicit parts. The Hessian is symmetrized.
  static Jet2 from_parts(double value, std::vector<double> gradient,
                         std::vector<double> hessian,
                         bool second_order = true);

  std::size_t dim() const noexcept { return gradient_.size(); }
  double value() const noexcept { return value_; }
  std::span<const double> gradient() const noexcept { return gradient_; }
  double gradient(std::size_t i) const { return gradient_[i]; }
  std::span<const double> hessian() const noexcept { return hessian_; }
  double hessian(std::size_t i, std::size_t j) const {
    return hessian_[i * dim() + j];
  }
  bool second_order() const noexcept { return second_order_; }

  /// Jet of the partial derivative along coordinate k. First order only.
  Jet2 partial(std::size_t k) const;

  Jet2 operator-() const;
  Jet2& operator+=(const Jet2& other);
  Jet2& operator-=(const Jet2& other);
  Jet2& operator*=(double s);

  friend Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
  friend Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
  friend Jet2 operator*(const Jet2& a, const Jet2& b);
  friend Jet2 operator/(const Jet2& a, const Jet2& b);

  friend Jet2 operator+(Jet2 a, double s) {
    a.value_ += s;
    return a;
  }
  friend Jet2 operator+(double s, Jet2 a) { return std::move(a) + s; }
  friend Jet2 operator-(Jet2 a, double s) {
    a.value_ -= s;
    return a;
  }
  friend Jet2 operator-(double s, const Jet2& a) { return -a + s; }
  friend Jet2 operator*(Jet2 a, double s) { return a *= s; }
  friend Jet2 operator*(double s, Jet2 a) { return a *= s; }

  friend bool operator==(const Jet2&, const Jet2&) = default;

 private:
  Jet2(double value, std::size_t n)
      : value_(value), gradient_(n, 0.0), hessian_(n * n, 0.0) {}

  double value_ = 0.0;
  std::vector<double> gradient_;
  std::vector<double> hessian_;
  bool second_order_ = true;
};

/// Composition g(u) given g and its first two derivatives at u.value().
Jet2 chain(double g_value, double g_prime, double g_second, const Jet2& u);

/// u^k for integer k; negative k divides, and fails where u vanishes.
Jet2 pow(const Jet2& u, int k);
Jet2 sqrt(const Jet2& u);
Jet2 exp(const Jet2& u);
Jet2 sin(const Jet2& u);
Jet2 cos(const Jet2& u);

/// x^k by binary powering, k >= 0. Shared by jet and plain evaluation so
/// both produce bit-identical values.
double ipow(double x, int k) noexcept;

}  // namespace nijkit
