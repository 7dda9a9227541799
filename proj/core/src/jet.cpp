#include "nijkit/jet.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nijkit/error.hpp"

namespace nijkit {

namespace {

void require_same_dim(const Jet2& a, const Jet2& b) {
  if (a.dim() != b.dim()) {
    throw DimensionError("jet dimension mismatch: " + std::to_string(a.dim()) +
                         " vs " + std::to_string(b.dim()));
  }
}

}  // namespace

Jet2 Jet2::constant(double value, std::size_t n) { return Jet2(value, n); }

Jet2 Jet2::coordinate(std::size_t index, std::span<const double> p) {
  if (index >= p.size()) {
    throw DimensionError("coordinate index " + std::to_string(index + 1) +
                         " out of range for dimension " +
                         std::to_string(p.size()));
  }
  Jet2 jet(p[index], p.size());
  jet.gradient_[index] = 1.0;
  return jet;
}

Jet2 Jet2::from_parts(double value, std::vector<double> gradient,
                      std::vector<double> hessian, bool second_order) {
  const std::size_t n = gradient.size();
  if (hessian.size() != n * n) {
    throw DimensionError("hessian size does not match gradient length");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = 0.5 * (hessian[i * n + j] + hessian[j * n + i]);
      hessian[i * n + j] = s;
      hessian[j * n + i] = s;
    }
  }
  Jet2 jet;
  jet.value_ = value;
  jet.gradient_ = std::move(gradient);
  jet.hessian_ = std::move(hessian);
  jet.second_order_ = second_order;
  return jet;
}

Jet2 Jet2::partial(std::size_t k) const {
  const std::size_t n = dim();
  if (k >= n) {
    throw DimensionError("partial derivative index out of range");
  }
  Jet2 d(gradient_[k], n);
  for (std::size_t l = 0; l < n; ++l) d.gradient_[l] = hessian_[k * n + l];
  d.second_order_ = false;
  return d;
}

Jet2 Jet2::operator-() const {
  Jet2 r = *this;
  r.value_ = -r.value_;
  for (double& g : r.gradient_) g = -g;
  for (double& h : r.hessian_) h = -h;
  return r;
}

Jet2& Jet2::operator+=(const Jet2& other) {
  require_same_dim(*this, other);
  value_ += other.value_;
  for (std::size_t i = 0; i < gradient_.size(); ++i) gradient_[i] += other.gradient_[i];
  for (std::size_t i = 0; i < hessian_.size(); ++i) hessian_[i] += other.hessian_[i];
  second_order_ = second_order_ && other.second_order_;
  return *this;
}

Jet2& Jet2::operator-=(const Jet2& other) {
  require_same_dim(*this, other);
  value_ -= other.value_;
  for (std::size_t i = 0; i < gradient_.size(); ++i) gradient_[i] -= other.gradient_[i];
  for (std::size_t i = 0; i < hessian_.size(); ++i) hessian_[i] -= other.hessian_[i];
  second_order_ = second_order_ && other.second_order_;
  return *this;
}

Jet2& Jet2::operator*=(double s) {
  value_ *= s;
  for (double& g : gradient_) g *= s;
  for (double& h : hessian_) h *= s;
  return *this;
}

Jet2 operator*(const Jet2& a, const Jet2& b) {
  require_same_dim(a, b);
  const std::size_t n = a.dim();
  Jet2 r(a.value_ * b.value_, n);
  for (std::size_t i = 0; i < n; ++i) {
    r.gradient_[i] = a.value_ * b.gradient_[i] + b.value_ * a.gradient_[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double h = a.value_ * b.hessian_[i * n + j] +
                       b.value_ * a.hessian_[i * n + j] +
                       (a.gradient_[i] * b.gradient_[j] +
                        b.gradient_[i] * a.gradient_[j]);
      r.hessian_[i * n + j] = h;
      r.hessian_[j * n + i] = h;
    }
  }
  r.second_order_ = a.second_order_ && b.second_order_;
  return r;
}

// q = a / b, differentiated from a = q * b:
//   grad q = (grad a - q grad b) / b
//   H q    = (H a - q H b - grad q grad b^T - grad b grad q^T) / b
Jet2 operator/(const Jet2& a, const Jet2& b) {
  require_same_dim(a, b);
  if (!(std::abs(b.value_) > kDivEpsilon * std::max(1.0, std::abs(a.value_)))) {
    throw DenominatorVanishes(b.value_);
  }
  const std::size_t n = a.dim();
  Jet2 q(a.value_ / b.value_, n);
  for (std::size_t i = 0; i < n; ++i) {
    q.gradient_[i] = (a.gradient_[i] - q.value_ * b.gradient_[i]) / b.value_;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double h =
          (a.hessian_[i * n + j] - q.value_ * b.hessian_[i * n + j] -
           (q.gradient_[i] * b.gradient_[j] + b.gradient_[i] * q.gradient_[j])) /
          b.value_;
      q.hessian_[i * n + j] = h;
      q.hessian_[j * n + i] = h;
    }
  }
  q.second_order_ = a.second_order_ && b.second_order_;
  return q;
}

Jet2 chain(double g_value, double g_prime, double g_second, const Jet2& u) {
  const std::size_t n = u.dim();
  std::vector<double> grad(n);
  std::vector<double> hess(n * n);
  const auto ug = u.gradient();
  for (std::size_t i = 0; i < n; ++i) grad[i] = g_prime * ug[i];
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double h = g_prime * u.hessian(i, j) + g_second * (ug[i] * ug[j]);
      hess[i * n + j] = h;
      hess[j * n + i] = h;
    }
  }
  return Jet2::from_parts(g_value, std::move(grad), std::move(hess),
                          u.second_order());
}

double ipow(double x, int k) noexcept {
  double result = 1.0;
  double base = x;
  unsigned e = static_cast<unsigned>(k);
  while (e != 0) {
    if (e & 1U) result *= base;
    e >>= 1U;
    if (e != 0) base *= base;
  }
  return result;
}

Jet2 pow(const Jet2& u, int k) {
  if (k < 0) return Jet2::constant(1.0, u.dim()) / pow(u, -k);
  if (k == 0) return Jet2::constant(1.0, u.dim());
  if (k == 1) return u;
  const double v = u.value();
  const double dk = static_cast<double>(k);
  return chain(ipow(v, k), dk * ipow(v, k - 1), dk * (dk - 1.0) * ipow(v, k - 2),
               u);
}

Jet2 sqrt(const Jet2& u) {
  const double v = u.value();
  if (v < 0.0) {
    throw DomainError("sqrt of negative value " + std::to_string(v));
  }
  const double s = std::sqrt(v);
  bool is_constant = std::all_of(u.gradient().begin(), u.gradient().end(),
                                 [](double g) { return g == 0.0; });
  is_constant = is_constant && std::all_of(u.hessian().begin(), u.hessian().end(),
                                           [](double h) { return h == 0.0; });
  if (is_constant) return chain(s, 0.0, 0.0, u);
  if (s == 0.0) throw DomainError("sqrt is not differentiable at 0");
  return chain(s, 0.5 / s, -0.25 / (s * v), u);
}

Jet2 exp(const Jet2& u) {
  const double e = std::exp(u.value());
  return chain(e, e, e, u);
}

Jet2 sin(const Jet2& u) {
  const double s = std::sin(u.value());
  return chain(s, std::cos(u.value()), -s, u);
}

Jet2 cos(const Jet2& u) {
  const double c = std::cos(u.value());
  return chain(c, -std::sin(u.value()), -c, u);
}

}  // namespace nijkit
