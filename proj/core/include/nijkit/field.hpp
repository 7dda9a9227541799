#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nijkit/expr.hpp"
#include "nijkit/jet.hpp"
#include "nijkit/matrix.hpp"

namespace nijkit {

using Point = std::vector<double>;

/// A smooth scalar function of n coordinates, evaluated to second-order jets.
class ScalarField {
 public:
  using Rule = std::function<Jet2(std::span<const double>)>;

  ScalarField(std::size_t dim, Rule rule, std::string description = {});

  static ScalarField from_expr(Expr e);
  static ScalarField constant(double value, std::size_t dim);
  /// x_index (0-based).
  static ScalarField coordinate(std::size_t index, std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  const std::string& description() const noexcept { return description_; }

  Jet2 operator()(std::span<const double> p) const;

 private:
  std::size_t dim_;
  Rule rule_;
  std::string description_;
};

/// Matrix L(p) and the derivatives of every entry at p.
struct OperatorEval {
  std::size_t n = 0;
  Matrix values;
  /// entry_grads[(i * n + j) * n + l] = d L^i_j / d x^l.
  std::vector<double> entry_grads;

  double grad(std::size_t i, std::size_t j, std::size_t l) const {
    return entry_grads[(i * n + j) * n + l];
  }
};

/// An n x n field of linear operators, entry (i, j) being L^i_j (row i, column j).
///
/// Entries are produced together by a single rule so builders can share work
/// (e.g. one evaluation of f per point). Individual entries remain addressable
/// as ScalarFields through entry().
class OperatorField {
 public:
  /// Produces the n*n entry jets in row-major order. A rule must report a
  /// vanishing denominator as SingularEntry naming the entry.
  using Rule = std::function<std::vector<Jet2>(std::span<const double>)>;

  OperatorField(std::size_t dim, Rule rule, std::string provenance);

  /// From an explicit row-major grid of n*n scalar fields.
  static OperatorField from_entries(std::vector<ScalarField> entries,
                                    std::string provenance);
  /// diag(d_1, ..., d_n).
  static OperatorField diagonal(std::vector<ScalarField> diag, std::string provenance);
  static OperatorField constant(const Matrix& m, std::string provenance = "constant");

  std::size_t dim() const noexcept { return dim_; }
  const std::string& provenance() const noexcept { return provenance_; }

  /// Scalar whose vanishing marks the singular locus of the entries
  /// (f_y for the families with f_y in a denominator). Sweeps reject points
  /// where it is small.
  const std::optional<ScalarField>& regularity() const noexcept { return regularity_; }
  OperatorField& set_regularity(ScalarField s);

  std::vector<Jet2> entry_jets(std::span<const double> p) const;
  ScalarField entry(std::size_t i, std::size_t j) const;

  /// Pointwise sum; the regularity marker is kept when only one side has one.
  friend OperatorField operator+(const OperatorField& a, const OperatorField& b);
  /// L + c * Id.
  OperatorField shifted(double c) const;

 private:
  std::size_t dim_;
  Rule rule_;
  std::string provenance_;
  std::optional<ScalarField> regularity_;
};

OperatorEval operator_eval(const OperatorField& field, std::span<const double> p);

/// Values only, L(p).
Matrix operator_values(const OperatorField& field, std::span<const double> p);

}  // namespace nijkit
