#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "nijkit/field.hpp"
#include "nijkit/sweep.hpp"

namespace nijkit {

/// |f_yy| below this at a critical point means the point is not Morse.
inline constexpr double kMorseEpsilon = 1e-6;
/// Within |y - c| < kTaylorDelta the Morse factor g is taken from f_yy.
inline constexpr double kTaylorDelta = 1e-3;
/// Relative threshold for calling a smoothness numerator zero.
inline constexpr double kNumeratorTol = 1e-10;

enum class SmoothnessVerdict { Regular, SingularZeroNumerators, Obstructed };

std::string_view verdict_name(SmoothnessVerdict v) noexcept;

/// Numerators of the fractions whose smoothness across f_y = 0 decides
/// whether the determinant-family operator extends smoothly:
///   N_0 = sum_i x_i f_{x_i} - f_{x_1} f_{x_(n-1)} - f
///   N_j = f_{x_(j-1)} + f_{x_j} f_{x_(n-1)},  j = 2..n-1
/// all over the common denominator f_y.
struct FractionDiagnostic {
  Point point;
  /// N_0 followed by N_2, ..., N_(n-1).
  std::vector<double> numerators;
  double denominator = 0.0;
  SmoothnessVerdict verdict = SmoothnessVerdict::Regular;
};

/// Never throws on a singular point; that is what it is for.
FractionDiagnostic smoothness_numerators(const ScalarField& f, std::size_t n,
                                         std::span<const double> p);

/// Residuals of the first-order system a remainder R(x1..x(n-1)) must
/// satisfy for f = +-y^2 + R to admit a smooth operator (R_i = dR/dx_i, m = n-1):
///   r0          = sum_i x_i R_i - R_1 R_m - R
///   chain[j-2]  = R_(j-1) + R_j R_m,                    j = 2..m
///   relations   = R_(n-i) - (-1)^(i-1) R_m^i,           i = 2..m
///   factor2     = n R_1 + sum_(k=2..m) (n-k+1) x_(k-1) R_k - x_m
/// factor2 is the second factor of the differentiated first equation; it is
/// not itself required to vanish.
struct PdeResiduals {
  double r0 = 0.0;
  std::vector<double> chain;
  std::vector<double> relations;
  double factor2 = 0.0;

  /// max |.| over r0, chain and relations.
  double max_required() const;
};

PdeResiduals pde_residuals(const ScalarField& R, std::size_t n, std::span<const double> x);

struct MorseOptions {
  double y0 = 0.0;
  int max_iters = 50;
  double tol_newton = 1e-13;
};

/// Critical point y = c(x) of y -> f(x, y), value R(x) = f(x, c) and sign of f_yy.
struct MorseData {
  Point x;
  double c = 0.0;
  double R = 0.0;
  int sign = 1;
  int newton_iters = 0;
};

/// Newton on f_y(x, .) from opts.y0. Throws NewtonDivergence or
/// NonMorseCritical.
MorseData morse_reduce(const ScalarField& f, std::size_t n, std::span<const double> x,
                       const MorseOptions& opts = {});

/// Fiberwise coordinate with f(x, y) = sign * ytilde^2 + R(x):
///   ytilde = (y - c) sqrt(|g|),  g = (f - R) / (y - c)^2.
/// For |y - c| < kTaylorDelta, g = f_yy(x, c + (y - c)/3) / 2, which matches
/// the quotient through the cubic term. ytilde > 0 for y > c.
double morse_coordinate(const ScalarField& f, const MorseData& m, double y);

/// R(x) = f(x, c(x)) as a field in x1..x(n-1). Derivatives come from the
/// implicit function theorem: R_i = f_(x_i), R_ij = f_ij - f_iy f_jy / f_yy.
ScalarField morse_remainder(const ScalarField& f, const MorseOptions& opts = {});

struct GridSpec {
  Box box;
  std::size_t points_per_axis = 21;
};

/// Checks |f - (sign ytilde^2 + R)| <= tol on a regular grid over the box
/// (n axes; the last is y). Errors from morse_reduce propagate.
VerificationReport verify_morse_normal_form(const ScalarField& f, std::size_t n,
                                            const GridSpec& grid, double tol,
                                            bool keep_records = false);

}  // namespace nijkit
