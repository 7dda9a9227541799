#include "nijkit/construct.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <utility>

#include "nijkit/error.hpp"

namespace nijkit {

namespace {

JetMatrix jet_product(const JetMatrix& a, const JetMatrix& b, std::size_t dim) {
  const std::size_t n = a.rows();
  JetMatrix r(n, b.cols(), Jet2::constant(0.0, dim));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      Jet2 acc = Jet2::constant(0.0, dim);
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      r(i, j) = std::move(acc);
    }
  }
  return r;
}

JetMatrix companion_jets(const std::vector<Jet2>& sigma, std::size_t dim) {
  const std::size_t n = sigma.size();
  JetMatrix m(n, n, Jet2::constant(0.0, dim));
  for (std::size_t i = 0; i < n; ++i) {
    m(i, 0) = -sigma[i];
    if (i + 1 < n) m(i, i + 1) = Jet2::constant(1.0, dim);
  }
  return m;
}

std::vector<Jet2> to_row_major(JetMatrix m) {
  std::vector<Jet2> out;
  out.reserve(m.rows() * m.cols());
  for (auto& j : m.data()) out.push_back(std::move(j));
  return out;
}

/// a / b, reporting a vanishing denominator against entry (row, col).
Jet2 entry_quotient(const Jet2& a, const Jet2& b, std::size_t row, std::size_t col) {
  try {
    return a / b;
  } catch (const DenominatorVanishes& e) {
    throw SingularEntry(row, col, e.denominator());
  }
}

ScalarField partial_field(const ScalarField& f, std::size_t k, std::string name) {
  return ScalarField(
      f.dim(), [f, k](std::span<const double> p) { return f(p).partial(k); },
      std::move(name));
}

}  // namespace

SigmaFields::SigmaFields(std::vector<ScalarField> fields) : fields_(std::move(fields)) {
  if (fields_.empty()) throw InvalidArgument("sigma list is empty");
  for (const auto& f : fields_) {
    if (f.dim() != fields_.size()) {
      throw DimensionError("sigma list of length " + std::to_string(fields_.size()) +
                           " contains a field of dimension " + std::to_string(f.dim()));
    }
  }
}

std::vector<double> SigmaFields::values(std::span<const double> p) const {
  std::vector<double> out;
  out.reserve(fields_.size());
  for (const auto& f : fields_) out.push_back(f(p).value());
  return out;
}

std::vector<Jet2> SigmaFields::jets(std::span<const double> p) const {
  std::vector<Jet2> out;
  out.reserve(fields_.size());
  for (const auto& f : fields_) out.push_back(f(p));
  return out;
}

SigmaFields coordinate_sigma(const ScalarField& f) {
  const std::size_t n = f.dim();
  if (n < 2) throw InvalidArgument("coordinate sigma needs n >= 2");
  std::vector<ScalarField> fields;
  for (std::size_t i = 0; i + 1 < n; ++i) fields.push_back(ScalarField::coordinate(i, n));
  fields.push_back(f);
  return SigmaFields(std::move(fields));
}

SigmaFields planar_sigma(const ScalarField& f) {
  if (f.dim() != 2) throw DimensionError("planar family needs dimension 2");
  ScalarField minus_x(
      2, [](std::span<const double> p) { return -Jet2::coordinate(0, p); }, "-x");
  return SigmaFields({std::move(minus_x), f});
}

Matrix companion_matrix(std::span<const double> sigma) {
  const std::size_t n = sigma.size();
  if (n < 2) throw InvalidArgument("companion matrix needs n >= 2");
  Matrix m(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, 0) = -sigma[i];
    if (i + 1 < n) m(i, i + 1) = 1.0;
  }
  return m;
}

Matrix jacobi_matrix(const SigmaFields& sigma, std::span<const double> p) {
  const std::size_t n = sigma.dim();
  Matrix j(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Jet2 s = sigma[i](p);
    for (std::size_t l = 0; l < n; ++l) j(i, l) = s.gradient(l);
  }
  return j;
}

OperatorField build_companion(const SigmaFields& sigma) {
  const std::size_t n = sigma.dim();
  if (n < 2) throw InvalidArgument("companion family needs n >= 2");
  return OperatorField(
      n,
      [sigma, n](std::span<const double> p) {
        return to_row_major(companion_jets(sigma.jets(p), n));
      },
      "companion");
}

OperatorField build_diff_nondegenerate(const SigmaFields& sigma) {
  const std::size_t n = sigma.dim();
  if (n < 2) throw InvalidArgument("differentially nondegenerate family needs n >= 2");
  auto jacobian = [n](const std::vector<Jet2>& s) {
    JetMatrix jac(n, n, Jet2::constant(0.0, n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t l = 0; l < n; ++l) jac(i, l) = s[i].partial(l);
    }
    return jac;
  };
  OperatorField L(
      n,
      [sigma, n, jacobian](std::span<const double> p) {
        const std::vector<Jet2> s = sigma.jets(p);
        JetMatrix jac = jacobian(s);
        JetMatrix rhs = jet_product(companion_jets(s, n), jac, n);
        solve_in_place(jac, rhs, det_epsilon(n));
        return to_row_major(std::move(rhs));
      },
      "diffnondeg");
  // det J marks the degenerate locus; near it J^-1 amplifies rounding.
  L.set_regularity(ScalarField(
      n,
      [sigma, n, jacobian](std::span<const double> p) {
        JetMatrix jac = jacobian(sigma.jets(p));
        JetMatrix none(n, 0);
        try {
          return solve_in_place(jac, none, 0.0);
        } catch (const DegeneratePoint&) {
          return Jet2::constant(0.0, n);  // exactly singular pivot
        }
      },
      "det J"));
  return L;
}

OperatorField build_planar(const ScalarField& f) {
  if (f.dim() != 2) throw DimensionError("planar family needs dimension 2");
  OperatorField L(
      2,
      [f](std::span<const double> p) {
        const Jet2 x = Jet2::coordinate(0, p);
        const Jet2 F = f(p);
        const Jet2 fx = F.partial(0);
        const Jet2 fy = F.partial(1);
        std::vector<Jet2> e;
        e.reserve(4);
        e.push_back(x - fx);
        e.push_back(-fy);
        e.push_back(entry_quotient(fx * fx - x * fx + F, fy, 1, 0));
        e.push_back(fx);
        return e;
      },
      "2d");
  L.set_regularity(partial_field(f, 1, "f_y"));
  return L;
}

OperatorField build_determinant_family(const ScalarField& f, std::size_t n) {
  if (n < 2) throw InvalidArgument("determinant family needs n >= 2");
  if (f.dim() != n) {
    throw DimensionError("f has dimension " + std::to_string(f.dim()) + ", expected " +
                         std::to_string(n));
  }
  OperatorField L(
      n,
      [f, n](std::span<const double> p) {
        const Jet2 zero = Jet2::constant(0.0, n);
        const Jet2 one = Jet2::constant(1.0, n);
        const Jet2 F = f(p);
        std::vector<Jet2> fx;
        for (std::size_t i = 0; i + 1 < n; ++i) fx.push_back(F.partial(i));
        const Jet2 fy = F.partial(n - 1);
        const Jet2& f_last = fx[n - 2];

        JetMatrix m(n, n, zero);
        for (std::size_t i = 0; i + 2 < n; ++i) {
          m(i, 0) = -Jet2::coordinate(i, p);
          m(i, i + 1) = one;
        }

        const std::size_t r = n - 2;
        m(r, 0) = fx[0] - Jet2::coordinate(n - 2, p);
        for (std::size_t j = 1; j + 1 < n; ++j) m(r, j) = fx[j];
        m(r, n - 1) = fy;

        const std::size_t s = n - 1;
        Jet2 numerator = zero;
        for (std::size_t i = 0; i + 1 < n; ++i) numerator += Jet2::coordinate(i, p) * fx[i];
        numerator -= fx[0] * f_last;
        numerator -= F;
        m(s, 0) = entry_quotient(numerator, fy, s, 0);
        for (std::size_t j = 1; j + 1 < n; ++j) {
          m(s, j) = -entry_quotient(fx[j - 1] + fx[j] * f_last, fy, s, j);
        }
        m(s, n - 1) = -f_last;
        return to_row_major(std::move(m));
      },
      "theorem1");
  L.set_regularity(partial_field(f, n - 1, "f_y"));
  return L;
}

OperatorField build_morse_canonical(std::size_t n, int sign) {
  if (n < 3) throw InvalidArgument("Morse canonical family requires n > 2");
  if (sign != 1 && sign != -1) throw InvalidArgument("sign must be +1 or -1");
  return OperatorField(
      n,
      [n, sign](std::span<const double> p) {
        JetMatrix m(n, n, Jet2::constant(0.0, n));
        for (std::size_t i = 0; i + 1 < n; ++i) m(i, 0) = -Jet2::coordinate(i, p);
        for (std::size_t i = 0; i + 2 < n; ++i) m(i, i + 1) = Jet2::constant(1.0, n);
        const Jet2 y = Jet2::coordinate(n - 1, p);
        m(n - 2, n - 1) = (2.0 * sign) * y;
        m(n - 1, 0) = -0.5 * y;
        return to_row_major(std::move(m));
      },
      sign > 0 ? "theorem2(+)" : "theorem2(-)");
}

ConjugationResidual conjugation_residual(const OperatorField& L, const SigmaFields& sigma,
                                         std::span<const double> p) {
  if (L.dim() != sigma.dim()) throw DimensionError("operator and sigma dimensions differ");
  const Matrix values = operator_values(L, p);
  const Matrix jac = jacobi_matrix(sigma, p);
  const Matrix comp = companion_matrix(sigma.values(p));
  const Matrix lhs = jac * values;
  const Matrix rhs = comp * jac;
  ConjugationResidual r;
  r.max_abs = max_abs(lhs - rhs);
  r.magnitude = max_abs(jac) * std::max(max_abs(values), max_abs(comp));
  return r;
}

ConjugationResidual verify_conjugation(const ScalarField& f, std::size_t n,
                                       std::span<const double> p) {
  if (f.dim() != n) throw DimensionError("f dimension differs from n");
  const double fy = f(p).gradient(n - 1);
  if (!(std::abs(fy) >= kDivEpsilon)) throw DenominatorVanishes(fy);
  return conjugation_residual(build_determinant_family(f, n), coordinate_sigma(f), p);
}

}  // namespace nijkit
