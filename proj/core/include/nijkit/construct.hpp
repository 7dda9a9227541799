#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nijkit/field.hpp"
#include "nijkit/matrix.hpp"

namespace nijkit {

/// Invariants sigma_1..sigma_n of an operator field, in the convention
/// det(t Id - L) = t^n + sigma_1 t^(n-1) + ... + sigma_n.
class SigmaFields {
 public:
  explicit SigmaFields(std::vector<ScalarField> fields);

  std::size_t dim() const noexcept { return fields_.size(); }
  const ScalarField& operator[](std::size_t i) const { return fields_[i]; }
  const std::vector<ScalarField>& fields() const noexcept { return fields_; }

  std::vector<double> values(std::span<const double> p) const;
  std::vector<Jet2> jets(std::span<const double> p) const;

 private:
  std::vector<ScalarField> fields_;
};

/// (x1, ..., x(n-1), f): the first n-1 invariants taken as coordinates.
SigmaFields coordinate_sigma(const ScalarField& f);
/// (-x, f) in the plane: trace equal to the first coordinate.
SigmaFields planar_sigma(const ScalarField& f);

/// Jacobian determinant threshold for the invertibility of J.
constexpr double det_epsilon(std::size_t n) { return 1e-10 * static_cast<double>(n); }

/// First column (-sigma_1, ..., -sigma_n), ones on the superdiagonal.
Matrix companion_matrix(std::span<const double> sigma);

/// J(p) with row i the gradient of sigma_i.
Matrix jacobi_matrix(const SigmaFields& sigma, std::span<const double> p);

/// The companion matrix of sigma(x) as an operator field.
OperatorField build_companion(const SigmaFields& sigma);

/// L = J^-1 companion(sigma) J for functionally independent sigma.
/// Evaluation throws DegeneratePoint where |det J| < det_epsilon(n).
OperatorField build_diff_nondegenerate(const SigmaFields& sigma);

/// Planar operator with tr L = x and det L = f(x, y):
///
///   [ x - f_x                     -f_y ]
///   [ (-x f_x + f_x^2 + f) / f_y   f_x ]
OperatorField build_planar(const ScalarField& f);

/// Operator with sigma_i = x_i for i < n and sigma_n = f(x1..x(n-1), y).
/// Rows 1..n-2 are companion rows; rows n-1 and n carry f's derivatives, the
/// last row divided by f_y. For n = 2 only those two rows exist.
OperatorField build_determinant_family(const ScalarField& f, std::size_t n);

/// Polynomial normal form for f = sign * y^2, n >= 3: companion rows, then
/// (-x(n-1), 0, ..., 0, sign*2y) and (-y/2, 0, ..., 0).
OperatorField build_morse_canonical(std::size_t n, int sign);

struct ConjugationResidual {
  double max_abs = 0.0;
  /// Size of the entries of J L and companion * J.
  double magnitude = 0.0;

  double relative() const { return max_abs / (1.0 + magnitude); }
};

/// max |J L - companion(sigma) J| at p with J = jacobi_matrix(sigma, p).
ConjugationResidual conjugation_residual(const OperatorField& L, const SigmaFields& sigma,
                                         std::span<const double> p);

/// conjugation_residual of build_determinant_family(f, n) against
/// coordinate_sigma(f). Throws DenominatorVanishes where f_y is ~0.
ConjugationResidual verify_conjugation(const ScalarField& f, std::size_t n,
                                       std::span<const double> p);

}  // namespace nijkit
