#include "nijkit/singularity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nijkit/error.hpp"

namespace nijkit {

namespace {

Point with_y(std::span<const double> x, double y) {
  Point p(x.begin(), x.end());
  p.push_back(y);
  return p;
}

double max_abs_of(std::span<const double> v) {
  double best = 0.0;
  for (double x : v) best = std::max(best, std::abs(x));
  return best;
}

double grid_coordinate(double lo, double hi, std::size_t i, std::size_t count) {
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
}

}  // namespace

std::string_view verdict_name(SmoothnessVerdict v) noexcept {
  switch (v) {
    case SmoothnessVerdict::Regular: return "regular";
    case SmoothnessVerdict::SingularZeroNumerators: return "singular-denominator-zero-numerators";
    case SmoothnessVerdict::Obstructed: return "obstructed";
  }
  return "?";
}

FractionDiagnostic smoothness_numerators(const ScalarField& f, std::size_t n,
                                         std::span<const double> p) {
  if (n < 2 || f.dim() != n || p.size() != n) {
    throw DimensionError("smoothness_numerators: f, n and point dimensions must agree");
  }
  const Jet2 F = f(p);
  const std::size_t m = n - 1;
  auto fx = [&](std::size_t i) { return F.gradient(i - 1); };  // 1-based x index

  FractionDiagnostic d;
  d.point.assign(p.begin(), p.end());
  d.denominator = F.gradient(n - 1);

  double n0 = 0.0;
  double scale = 1.0 + std::abs(F.value()) + std::abs(fx(1) * fx(m));
  for (std::size_t i = 1; i <= m; ++i) {
    n0 += p[i - 1] * fx(i);
    scale += std::abs(p[i - 1] * fx(i));
  }
  n0 -= fx(1) * fx(m);
  n0 -= F.value();
  d.numerators.push_back(n0);
  for (std::size_t j = 2; j <= m; ++j) {
    d.numerators.push_back(fx(j - 1) + fx(j) * fx(m));
    scale += std::abs(fx(j - 1)) + std::abs(fx(j) * fx(m));
  }

  const double largest = max_abs_of(d.numerators);
  if (std::abs(d.denominator) > kDivEpsilon * std::max(1.0, largest)) {
    d.verdict = SmoothnessVerdict::Regular;
  } else if (largest > kNumeratorTol * scale) {
    d.verdict = SmoothnessVerdict::Obstructed;
  } else {
    d.verdict = SmoothnessVerdict::SingularZeroNumerators;
  }
  return d;
}

double PdeResiduals::max_required() const {
  return std::max({std::abs(r0), max_abs_of(chain), max_abs_of(relations)});
}

PdeResiduals pde_residuals(const ScalarField& R, std::size_t n, std::span<const double> x) {
  if (n < 2 || R.dim() != n - 1 || x.size() != n - 1) {
    throw DimensionError("pde_residuals: R must be a function of n-1 variables");
  }
  const Jet2 J = R(x);
  const std::size_t m = n - 1;
  auto Ri = [&](std::size_t i) { return J.gradient(i - 1); };  // 1-based
  auto xi = [&](std::size_t i) { return x[i - 1]; };

  PdeResiduals r;
  double r0 = 0.0;
  for (std::size_t i = 1; i <= m; ++i) r0 += xi(i) * Ri(i);
  r0 -= Ri(1) * Ri(m);
  r0 -= J.value();
  r.r0 = r0;

  for (std::size_t j = 2; j <= m; ++j) r.chain.push_back(Ri(j - 1) + Ri(j) * Ri(m));

  for (std::size_t i = 2; i <= m; ++i) {
    const double sign = (i - 1) % 2 == 0 ? 1.0 : -1.0;
    r.relations.push_back(Ri(n - i) - sign * ipow(Ri(m), static_cast<int>(i)));
  }

  double f2 = static_cast<double>(n) * Ri(1);
  for (std::size_t k = 2; k <= m; ++k) {
    f2 += static_cast<double>(n - k + 1) * xi(k - 1) * Ri(k);
  }
  r.factor2 = f2 - xi(m);
  return r;
}

MorseData morse_reduce(const ScalarField& f, std::size_t n, std::span<const double> x,
                       const MorseOptions& opts) {
  if (n < 2 || f.dim() != n || x.size() != n - 1) {
    throw DimensionError("morse_reduce: f must have dimension n and x n-1 coordinates");
  }
  const std::size_t yi = n - 1;
  double y = opts.y0;
  bool converged = false;
  Jet2 F;
  int iters = 0;
  while (iters < opts.max_iters) {
    F = f(with_y(x, y));
    ++iters;
    const double fy = F.gradient(yi);
    const double fyy = F.hessian(yi, yi);
    if (std::abs(fy) <= 1e-12 * (1.0 + std::abs(fyy))) {
      converged = true;
      break;
    }
    if (std::abs(fyy) < kMorseEpsilon) {
      throw NewtonDivergence("Newton step undefined: f_yy ~ 0 at y = " + std::to_string(y) +
                             " where f_y = " + std::to_string(fy));
    }
    const double step = fy / fyy;
    y -= step;
    if (!std::isfinite(y)) throw NewtonDivergence("Newton iterate is not finite");
    if (std::abs(step) <= opts.tol_newton * (1.0 + std::abs(y))) {
      F = f(with_y(x, y));
      ++iters;
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw NewtonDivergence("Newton did not converge in " + std::to_string(opts.max_iters) +
                           " iterations");
  }
  const double fyy = F.hessian(yi, yi);
  if (std::abs(fyy) < kMorseEpsilon) throw NonMorseCritical(fyy);

  MorseData m;
  m.x.assign(x.begin(), x.end());
  m.c = y;
  m.R = F.value();
  m.sign = fyy > 0.0 ? 1 : -1;
  m.newton_iters = iters;
  return m;
}

double morse_coordinate(const ScalarField& f, const MorseData& m, double y) {
  const double d = y - m.c;
  double g = 0.0;
  if (std::abs(d) >= kTaylorDelta) {
    g = (f(with_y(m.x, y)).value() - m.R) / (d * d);
  } else {
    const std::size_t yi = m.x.size();
    g = 0.5 * f(with_y(m.x, m.c + d / 3.0)).hessian(yi, yi);
  }
  return d * std::sqrt(std::abs(g));
}

ScalarField morse_remainder(const ScalarField& f, const MorseOptions& opts) {
  const std::size_t n = f.dim();
  if (n < 2) throw InvalidArgument("morse_remainder needs n >= 2");
  const std::size_t m = n - 1;
  return ScalarField(
      m,
      [f, n, m, opts](std::span<const double> x) {
        const MorseData md = morse_reduce(f, n, x, opts);
        const Jet2 F = f(with_y(x, md.c));
        const double fyy = F.hessian(m, m);
        std::vector<double> grad(m);
        std::vector<double> hess(m * m);
        for (std::size_t i = 0; i < m; ++i) {
          grad[i] = F.gradient(i);
          for (std::size_t j = 0; j < m; ++j) {
            hess[i * m + j] = F.hessian(i, j) - F.hessian(i, m) * F.hessian(j, m) / fyy;
          }
        }
        return Jet2::from_parts(md.R, std::move(grad), std::move(hess), F.second_order());
      },
      "R[" + f.description() + "]");
}

VerificationReport verify_morse_normal_form(const ScalarField& f, std::size_t n,
                                            const GridSpec& grid, double tol,
                                            bool keep_records) {
  if (f.dim() != n || grid.box.dim() != n) {
    throw DimensionError("verify_morse_normal_form: grid box must have n axes");
  }
  grid.box.validate();
  if (grid.points_per_axis < 2) throw InvalidArgument("grid needs at least 2 points per axis");
  const std::size_t k = grid.points_per_axis;
  const std::size_t m = n - 1;

  VerificationReport report;
  report.subject = "Morse normal form of " + f.description();
  report.tol = tol;

  std::size_t slices = 1;
  for (std::size_t i = 0; i < m; ++i) slices *= k;
  Point x(m);
  bool first = true;
  for (std::size_t s = 0; s < slices; ++s) {
    std::size_t rest = s;
    for (std::size_t a = m; a-- > 0;) {
      x[a] = grid_coordinate(grid.box.lo[a], grid.box.hi[a], rest % k, k);
      rest /= k;
    }
    const MorseData md = morse_reduce(f, n, x);
    for (std::size_t t = 0; t < k; ++t) {
      const double y = grid_coordinate(grid.box.lo[m], grid.box.hi[m], t, k);
      const Point p = with_y(x, y);
      const double yt = morse_coordinate(f, md, y);
      const double defect =
          std::abs(f(p).value() - (static_cast<double>(md.sign) * yt * yt + md.R));
      ++report.samples;
      ++report.accepted;
      report.max_residual = std::max(report.max_residual, defect);
      if (first || !(defect <= report.max_relative)) {
        report.max_relative = std::isnan(defect) ? HUGE_VAL : defect;
        report.worst_point = p;
        first = false;
      }
      if (keep_records) report.records.push_back(SampleRecord{p, true, defect, 1.0, {}});
    }
  }
  report.pass = report.max_relative <= tol;
  return report;
}

}  // namespace nijkit
