#include "nijkit/torsion.hpp"

#include <algorithm>
#include <cmath>

#include "nijkit/error.hpp"

namespace nijkit {

namespace {

std::vector<double> column(const Matrix& m, std::size_t j) {
  std::vector<double> c(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) c[i] = m(i, j);
  return c;
}

std::vector<double> times_vector(const Matrix& m, const std::vector<double>& v) {
  std::vector<double> r(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t k = 0; k < m.cols(); ++k) r[i] += m(i, k) * v[k];
  }
  return r;
}

StencilSample constant_sample(std::vector<double> value, std::size_t n, double h) {
  StencilSample s;
  s.h = h;
  s.center = value;
  s.plus.assign(n, value);
  s.minus.assign(n, value);
  return s;
}

}  // namespace

double TorsionValue::max_abs() const {
  double best = 0.0;
  for (double c : components) {
    if (std::isnan(c)) return HUGE_VAL;
    best = std::max(best, std::abs(c));
  }
  return best;
}

TorsionValue torsion_from_eval(const OperatorEval& ev, std::span<const double> p) {
  const std::size_t n = ev.n;
  const Matrix& L = ev.values;
  TorsionValue t;
  t.n = n;
  t.point.assign(p.begin(), p.end());
  t.components.assign(n * n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        double acc = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
          acc += L(l, j) * ev.grad(i, k, l) - L(l, k) * ev.grad(i, j, l) -
                 L(i, l) * ev.grad(l, k, j) + L(i, l) * ev.grad(l, j, k);
        }
        t.components[(i * n + j) * n + k] = acc;
        t.components[(i * n + k) * n + j] = -acc;
      }
    }
  }
  return t;
}

TorsionValue torsion_coordinate(const OperatorField& L, std::span<const double> p) {
  return torsion_from_eval(operator_eval(L, p), p);
}

StencilSample StencilSample::of(const VectorField& field, std::span<const double> p,
                                double h) {
  const std::size_t n = p.size();
  StencilSample s;
  s.h = h;
  s.center = field(p);
  std::vector<double> q(p.begin(), p.end());
  for (std::size_t l = 0; l < n; ++l) {
    q[l] = p[l] + h;
    s.plus.push_back(field(q));
    q[l] = p[l] - h;
    s.minus.push_back(field(q));
    q[l] = p[l];
  }
  return s;
}

double StencilSample::derivative(std::size_t i, std::size_t l) const {
  return (plus[l][i] - minus[l][i]) / (2.0 * h);
}

std::vector<double> lie_bracket(const StencilSample& x, const StencilSample& y) {
  const std::size_t n = x.center.size();
  if (y.center.size() != n || x.plus.size() != n || y.plus.size() != n) {
    throw DimensionError("lie bracket: stencil shapes differ");
  }
  std::vector<double> r(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      acc += x.center[l] * y.derivative(i, l) - y.center[l] * x.derivative(i, l);
    }
    r[i] = acc;
  }
  return r;
}

std::vector<double> lie_bracket_fd(const VectorField& x, const VectorField& y,
                                   std::span<const double> p, double h) {
  return lie_bracket(StencilSample::of(x, p, h), StencilSample::of(y, p, h));
}

TorsionValue torsion_bracket_fd(const OperatorField& L, std::span<const double> p,
                                double h) {
  if (!(h > 0.0)) throw InvalidArgument("finite-difference step must be positive");
  const std::size_t n = L.dim();
  if (p.size() != n) throw DimensionError("point dimension differs from operator dimension");

  // Evaluate L once per stencil point; the vector fields L d_j are its columns.
  const Matrix center = operator_values(L, p);
  std::vector<Matrix> plus;
  std::vector<Matrix> minus;
  std::vector<double> q(p.begin(), p.end());
  for (std::size_t l = 0; l < n; ++l) {
    q[l] = p[l] + h;
    plus.push_back(operator_values(L, q));
    q[l] = p[l] - h;
    minus.push_back(operator_values(L, q));
    q[l] = p[l];
  }

  std::vector<StencilSample> image(n);
  std::vector<StencilSample> basis(n);
  for (std::size_t j = 0; j < n; ++j) {
    image[j].h = h;
    image[j].center = column(center, j);
    for (std::size_t l = 0; l < n; ++l) {
      image[j].plus.push_back(column(plus[l], j));
      image[j].minus.push_back(column(minus[l], j));
    }
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    basis[j] = constant_sample(std::move(e), n, h);
  }

  const Matrix square = center * center;
  TorsionValue t;
  t.n = n;
  t.point.assign(p.begin(), p.end());
  t.components.assign(n * n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      const auto uv = lie_bracket(basis[j], basis[k]);
      const auto lu_lv = lie_bracket(image[j], image[k]);
      const auto l_u_lv = times_vector(center, lie_bracket(basis[j], image[k]));
      const auto l_lu_v = times_vector(center, lie_bracket(image[j], basis[k]));
      const auto l2_uv = times_vector(square, uv);
      for (std::size_t i = 0; i < n; ++i) {
        t.components[(i * n + j) * n + k] = l2_uv[i] + lu_lv[i] - l_u_lv[i] - l_lu_v[i];
      }
    }
  }
  return t;
}

VerificationReport verify_zero_torsion(const OperatorField& L, const SweepOptions& options) {
  if (options.box.dim() != L.dim()) {
    throw DimensionError("sampling box dimension differs from operator dimension");
  }
  return run_sweep("torsion of " + L.provenance(), options,
                   [&](std::span<const double> p) -> std::optional<PointOutcome> {
                     if (near_singular(L, p, options.min_denominator)) return std::nullopt;
                     const OperatorEval ev = operator_eval(L, p);
                     const TorsionValue t = torsion_from_eval(ev, p);
                     return PointOutcome{t.max_abs(), 1.0 + max_abs(ev.values)};
                   });
}

}  // namespace nijkit
