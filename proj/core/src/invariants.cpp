#include "nijkit/invariants.hpp"

#include <algorithm>
#include <cmath>

#include "nijkit/error.hpp"

namespace nijkit {

double CharPolyCoeffs::determinant_mismatch() const {
  const double sign = sigma.size() % 2 == 0 ? 1.0 : -1.0;
  return std::abs(sigma.back() - sign * determinant);
}

CharPolyCoeffs charpoly(const Matrix& m) {
  const std::size_t n = m.rows();
  if (n == 0 || m.cols() != n) throw DimensionError("charpoly needs a non-empty square matrix");
  for (double v : m.data()) {
    if (!std::isfinite(v)) throw InvalidArgument("charpoly of a matrix with non-finite entries");
  }
  CharPolyCoeffs c;
  c.sigma.resize(n);
  Matrix mk = identity(n);
  for (std::size_t k = 1; k <= n; ++k) {
    const Matrix amk = m * mk;
    c.sigma[k - 1] = -trace(amk) / static_cast<double>(k);
    if (k < n) {
      mk = amk;
      for (std::size_t i = 0; i < n; ++i) mk(i, i) += c.sigma[k - 1];
    }
  }
  c.determinant = determinant(m);
  return c;
}

double cayley_hamilton_residual(const Matrix& m, const CharPolyCoeffs& c) {
  const std::size_t n = m.rows();
  // Horner: ((M + s1 I) M + s2 I) M + ... + sn I
  Matrix acc = identity(n);
  for (std::size_t k = 0; k < n; ++k) {
    acc = acc * m;
    for (std::size_t i = 0; i < n; ++i) acc(i, i) += c.sigma[k];
  }
  return max_abs(acc);
}

VerificationReport verify_sigma(const OperatorField& L, const SigmaFields& expected,
                                const SweepOptions& options) {
  if (expected.dim() != L.dim() || options.box.dim() != L.dim()) {
    throw DimensionError("verify_sigma: dimensions of operator, invariants and box differ");
  }
  return run_sweep("invariants of " + L.provenance(), options,
                   [&](std::span<const double> p) -> std::optional<PointOutcome> {
                     if (near_singular(L, p, options.min_denominator)) return std::nullopt;
                     const Matrix values = operator_values(L, p);
                     const CharPolyCoeffs c = charpoly(values);
                     const std::vector<double> want = expected.values(p);
                     double worst = 0.0;
                     for (std::size_t i = 0; i < want.size(); ++i) {
                       worst = std::max(worst, std::abs(c.sigma[i] - want[i]));
                     }
                     return PointOutcome{worst, 1.0 + max_abs(values)};
                   });
}

VerificationReport verify_sigma_coords(const OperatorField& L, const ScalarField& f,
                                       std::size_t n, const SweepOptions& options) {
  if (f.dim() != n) throw DimensionError("f dimension differs from n");
  return verify_sigma(L, coordinate_sigma(f), options);
}

}  // namespace nijkit
