#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "nijkit/field.hpp"
#include "nijkit/sweep.hpp"

namespace nijkit {

inline constexpr double kDefaultFdStep = 1e-4;

/// Components N^i_{jk} of the Nijenhuis torsion at a point.
struct TorsionValue {
  std::size_t n = 0;
  std::vector<double> components;
  Point point;

  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return components[(i * n + j) * n + k];
  }
  double max_abs() const;
};

/// Coordinate contraction
///   N^i_{jk} = L^l_j d_l L^i_k - L^l_k d_l L^i_j - L^i_l d_j L^l_k + L^i_l d_k L^l_j.
/// Only j < k is computed; the k < j half is its exact negation and j = k is 0.
TorsionValue torsion_coordinate(const OperatorField& L, std::span<const double> p);
TorsionValue torsion_from_eval(const OperatorEval& ev, std::span<const double> p);

using VectorField = std::function<std::vector<double>(std::span<const double>)>;

/// A vector field sampled on the central-difference stencil around p:
/// center value and values at p +- h e_l.
struct StencilSample {
  double h = 0.0;
  std::vector<double> center;
  std::vector<std::vector<double>> plus;
  std::vector<std::vector<double>> minus;

  static StencilSample of(const VectorField& field, std::span<const double> p, double h);
  /// Central-difference d_l of component i.
  double derivative(std::size_t i, std::size_t l) const;
};

/// [X, Y]^i = X^l d_l Y^i - Y^l d_l X^i with central differences.
std::vector<double> lie_bracket(const StencilSample& x, const StencilSample& y);
std::vector<double> lie_bracket_fd(const VectorField& x, const VectorField& y,
                                   std::span<const double> p, double h);

/// Torsion from the bracket form
///   N(u, v) = L^2 [u, v] + [Lu, Lv] - L [u, Lv] - L [Lu, v]
/// with u = d_j, v = d_k and every bracket taken by central differences of
/// the component functions. Independent of the entry gradients; agrees with
/// torsion_coordinate to O(h^2).
TorsionValue torsion_bracket_fd(const OperatorField& L, std::span<const double> p,
                                double h = kDefaultFdStep);

/// Samples the box and reports max |N| per point against the relative
/// tolerance tol * (1 + max |L(p)|).
VerificationReport verify_zero_torsion(const OperatorField& L, const SweepOptions& options);

}  // namespace nijkit
