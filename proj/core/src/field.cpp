#include "nijkit/field.hpp"

#include <memory>
#include <utility>

#include "nijkit/error.hpp"

namespace nijkit {

namespace {

void check_point(std::size_t dim, std::span<const double> p) {
  if (p.size() != dim) {
    throw DimensionError("field of dimension " + std::to_string(dim) +
                         " evaluated at a point of dimension " + std::to_string(p.size()));
  }
}

}  // namespace

ScalarField::ScalarField(std::size_t dim, Rule rule, std::string description)
    : dim_(dim), rule_(std::move(rule)), description_(std::move(description)) {
  if (dim_ == 0) throw InvalidArgument("scalar field needs dimension >= 1");
  if (!rule_) throw InvalidArgument("scalar field needs an evaluation rule");
}

ScalarField ScalarField::from_expr(Expr e) {
  const std::size_t n = e.dim();
  std::string text = format(e);
  auto shared = std::make_shared<const Expr>(std::move(e));
  return ScalarField(
      n, [shared](std::span<const double> p) { return eval(*shared, p); },
      std::move(text));
}

ScalarField ScalarField::constant(double value, std::size_t dim) {
  return ScalarField(
      dim, [value, dim](std::span<const double>) { return Jet2::constant(value, dim); },
      std::to_string(value));
}

ScalarField ScalarField::coordinate(std::size_t index, std::size_t dim) {
  if (index >= dim) throw DimensionError("coordinate index out of range");
  return ScalarField(
      dim, [index](std::span<const double> p) { return Jet2::coordinate(index, p); },
      "x" + std::to_string(index + 1));
}

Jet2 ScalarField::operator()(std::span<const double> p) const {
  check_point(dim_, p);
  return rule_(p);
}

OperatorField::OperatorField(std::size_t dim, Rule rule, std::string provenance)
    : dim_(dim), rule_(std::move(rule)), provenance_(std::move(provenance)) {
  if (dim_ == 0) throw InvalidArgument("operator field needs dimension >= 1");
  if (!rule_) throw InvalidArgument("operator field needs an evaluation rule");
}

OperatorField OperatorField::from_entries(std::vector<ScalarField> entries,
                                          std::string provenance) {
  std::size_t n = 0;
  while (n * n < entries.size()) ++n;
  if (n == 0 || n * n != entries.size()) {
    throw DimensionError("operator entries must form a square grid");
  }
  for (const auto& e : entries) {
    if (e.dim() != n) throw DimensionError("operator entry dimension differs from n");
  }
  auto shared = std::make_shared<const std::vector<ScalarField>>(std::move(entries));
  return OperatorField(
      n,
      [shared, n](std::span<const double> p) {
        std::vector<Jet2> jets;
        jets.reserve(n * n);
        for (std::size_t k = 0; k < n * n; ++k) {
          try {
            jets.push_back((*shared)[k](p));
          } catch (const DenominatorVanishes& e) {
            throw SingularEntry(k / n, k % n, e.denominator());
          }
        }
        return jets;
      },
      std::move(provenance));
}

OperatorField OperatorField::diagonal(std::vector<ScalarField> diag,
                                      std::string provenance) {
  const std::size_t n = diag.size();
  std::vector<ScalarField> entries;
  entries.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      entries.push_back(i == j ? diag[i] : ScalarField::constant(0.0, n));
    }
  }
  return from_entries(std::move(entries), std::move(provenance));
}

OperatorField OperatorField::constant(const Matrix& m, std::string provenance) {
  if (m.rows() != m.cols()) throw DimensionError("constant operator must be square");
  const std::size_t n = m.rows();
  return OperatorField(
      n,
      [m, n](std::span<const double>) {
        std::vector<Jet2> jets;
        jets.reserve(n * n);
        for (double v : m.data()) jets.push_back(Jet2::constant(v, n));
        return jets;
      },
      std::move(provenance));
}

OperatorField& OperatorField::set_regularity(ScalarField s) {
  if (s.dim() != dim_) throw DimensionError("regularity marker dimension differs");
  regularity_ = std::move(s);
  return *this;
}

std::vector<Jet2> OperatorField::entry_jets(std::span<const double> p) const {
  check_point(dim_, p);
  std::vector<Jet2> jets = rule_(p);
  if (jets.size() != dim_ * dim_) throw DimensionError("operator rule returned wrong entry count");
  return jets;
}

ScalarField OperatorField::entry(std::size_t i, std::size_t j) const {
  if (i >= dim_ || j >= dim_) throw DimensionError("operator entry index out of range");
  const std::size_t k = i * dim_ + j;
  return ScalarField(
      dim_, [field = *this, k](std::span<const double> p) { return field.entry_jets(p)[k]; },
      provenance_ + "[" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "]");
}

OperatorField operator+(const OperatorField& a, const OperatorField& b) {
  if (a.dim() != b.dim()) throw DimensionError("operator sum: dimension mismatch");
  OperatorField sum(
      a.dim(),
      [a, b](std::span<const double> p) {
        std::vector<Jet2> lhs = a.entry_jets(p);
        const std::vector<Jet2> rhs = b.entry_jets(p);
        for (std::size_t k = 0; k < lhs.size(); ++k) lhs[k] += rhs[k];
        return lhs;
      },
      "(" + a.provenance() + ")+(" + b.provenance() + ")");
  if (a.regularity()) {
    sum.set_regularity(*a.regularity());
  } else if (b.regularity()) {
    sum.set_regularity(*b.regularity());
  }
  return sum;
}

OperatorField OperatorField::shifted(double c) const {
  Matrix shift = identity(dim_);
  for (double& v : shift.data()) v *= c;
  return *this + constant(shift, std::to_string(c) + "*Id");
}

OperatorEval operator_eval(const OperatorField& field, std::span<const double> p) {
  const std::size_t n = field.dim();
  const std::vector<Jet2> jets = field.entry_jets(p);
  OperatorEval out;
  out.n = n;
  out.values = Matrix(n, n, 0.0);
  out.entry_grads.assign(n * n * n, 0.0);
  for (std::size_t k = 0; k < n * n; ++k) {
    out.values.data()[k] = jets[k].value();
    const auto g = jets[k].gradient();
    for (std::size_t l = 0; l < n; ++l) out.entry_grads[k * n + l] = g[l];
  }
  return out;
}

Matrix operator_values(const OperatorField& field, std::span<const double> p) {
  const std::size_t n = field.dim();
  const std::vector<Jet2> jets = field.entry_jets(p);
  Matrix m(n, n, 0.0);
  for (std::size_t k = 0; k < n * n; ++k) m.data()[k] = jets[k].value();
  return m;
}

}  // namespace nijkit
