#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "nijkit/error.hpp"
#include "nijkit/jet.hpp"

namespace nijkit {

enum class NodeKind { Constant, Variable, Add, Sub, Neg, Mul, Div, Pow, Call };

enum class Builtin { Sqrt, Exp, Sin, Cos };

inline constexpr int kMaxExponent = 64;

struct ExprNode;
using NodePtr = std::shared_ptr<const ExprNode>;

/// Immutable AST node. Which fields are meaningful depends on kind:
/// Constant uses constant, Variable uses variable (0-based), Pow uses lhs and
/// exponent, Call uses builtin and lhs, Neg uses lhs, binary kinds use both.
struct ExprNode {
  NodeKind kind = NodeKind::Constant;
  double constant = 0.0;
  std::size_t variable = 0;
  int exponent = 0;
  Builtin builtin = Builtin::Sqrt;
  NodePtr lhs;
  NodePtr rhs;
};

/// How variable names map to indices.
///   WithY:  x1..x(n-1) are indices 0..n-2 and y is index n-1.
///   XOnly:  x1..xn are indices 0..n-1 (functions of the base coordinates).
/// When only one x-variable exists the bare name `x` is accepted for x1.
enum class VariableScheme { WithY, XOnly };

/// A parsed expression together with the variable set it was parsed against.
class Expr {
 public:
  Expr(NodePtr root, std::size_t dim, VariableScheme scheme);

  const ExprNode& root() const noexcept { return *root_; }
  const NodePtr& root_ptr() const noexcept { return root_; }
  std::size_t dim() const noexcept { return dim_; }
  VariableScheme scheme() const noexcept { return scheme_; }

  /// Structural equality (same tree shape, kinds, constants and indices).
  friend bool operator==(const Expr& a, const Expr& b);

 private:
  NodePtr root_;
  std::size_t dim_;
  VariableScheme scheme_;
};

enum class ParseErrorKind {
  Lexical,
  UnknownIdentifier,
  VariableOutOfRange,
  NonIntegerExponent,
  ExponentTooLarge,
  UnbalancedParentheses,
  UnexpectedToken,
  UnexpectedEnd,
};

/// Syntax error with the byte offset into the input where it was detected.
class ParseError : public Error {
 public:
  ParseError(ParseErrorKind kind, std::size_t offset, const std::string& what);
  ParseErrorKind kind() const noexcept { return kind_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  ParseErrorKind kind_;
  std::size_t offset_;
};

/// Parses f(x1, ..., x(n-1), y). Requires n >= 2.
Expr parse(std::string_view text, std::size_t n);

/// Parses a function of x1..xm only (no y). Requires m >= 1.
Expr parse_x_only(std::string_view text, std::size_t m);

/// Jet of the expression at p; p.size() must equal e.dim().
Jet2 eval(const Expr& e, std::span<const double> p);

/// Plain floating-point evaluation in the same operation order as eval().
double eval_value(const Expr& e, std::span<const double> p);

/// Canonical fully parenthesized rendering; parse() of the result yields a
/// structurally equal tree.
std::string format(const Expr& e);

std::string_view builtin_name(Builtin b) noexcept;

/// Node constructors for building trees programmatically.
namespace ast {
/// Literal constants are non-negative; negative values are written via neg().
NodePtr constant(double value);
NodePtr variable(std::size_t index);
NodePtr add(NodePtr a, NodePtr b);
NodePtr sub(NodePtr a, NodePtr b);
NodePtr mul(NodePtr a, NodePtr b);
NodePtr div(NodePtr a, NodePtr b);
NodePtr neg(NodePtr a);
NodePtr pow(NodePtr a, int exponent);
NodePtr call(Builtin fn, NodePtr a);
}  // namespace ast

}  // namespace nijkit
