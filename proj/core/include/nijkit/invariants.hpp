#pragma once

#include <cstddef>
#include <vector>

#include "nijkit/construct.hpp"
#include "nijkit/field.hpp"
#include "nijkit/matrix.hpp"
#include "nijkit/sweep.hpp"

namespace nijkit {

/// Coefficients of det(t Id - M) = t^n + sigma_1 t^(n-1) + ... + sigma_n.
struct CharPolyCoeffs {
  std::vector<double> sigma;
  /// det M by elimination, independent of the recursion.
  double determinant = 0.0;

  /// |sigma_n - (-1)^n det M|: chi(0) checked against elimination.
  double determinant_mismatch() const;
};

/// Faddeev-LeVerrier recursion:
///   M_1 = I,  sigma_k = -tr(A M_k) / k,  M_(k+1) = A M_k + sigma_k I.
CharPolyCoeffs charpoly(const Matrix& m);

/// max |M^n + sigma_1 M^(n-1) + ... + sigma_n I| (Cayley-Hamilton).
double cayley_hamilton_residual(const Matrix& m, const CharPolyCoeffs& c);

/// Sweeps the box comparing charpoly(L(p)) with expected(p) coefficientwise,
/// relative to 1 + max |L(p)|.
VerificationReport verify_sigma(const OperatorField& L, const SigmaFields& expected,
                                const SweepOptions& options);

/// verify_sigma against (x1, ..., x(n-1), f).
VerificationReport verify_sigma_coords(const OperatorField& L, const ScalarField& f,
                                       std::size_t n, const SweepOptions& options);

}  // namespace nijkit
