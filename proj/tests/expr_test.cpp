#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "corpus.hpp"
#include "nijkit/expr.hpp"
#include "oracles.hpp"

using namespace nijkit;

namespace {

ParseError parse_error_of(const std::string& text, std::size_t n) {
  try {
    parse(text, n);
  } catch (const ParseError& e) {
    return e;
  }
  ADD_FAILURE() << "no parse error for '" << text << "'";
  return ParseError(ParseErrorKind::Lexical, 0, "none");
}

NodePtr random_tree(std::mt19937_64& rng, std::size_t dim, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 8);
  std::uniform_int_distribution<std::size_t> var(0, dim - 1);
  std::uniform_real_distribution<double> c(0.0, 10.0);
  switch (pick(rng)) {
    case 0: return ast::constant(c(rng));
    case 1: return ast::variable(var(rng));
    case 2: return ast::add(random_tree(rng, dim, depth - 1), random_tree(rng, dim, depth - 1));
    case 3: return ast::sub(random_tree(rng, dim, depth - 1), random_tree(rng, dim, depth - 1));
    case 4: return ast::mul(random_tree(rng, dim, depth - 1), random_tree(rng, dim, depth - 1));
    case 5: return ast::div(random_tree(rng, dim, depth - 1), random_tree(rng, dim, depth - 1));
    case 6: return ast::neg(random_tree(rng, dim, depth - 1));
    case 7: {
      std::uniform_int_distribution<int> k(-4, 6);
      return ast::pow(random_tree(rng, dim, depth - 1), k(rng));
    }
    default: {
      std::uniform_int_distribution<int> fn(0, 3);
      return ast::call(static_cast<Builtin>(fn(rng)), random_tree(rng, dim, depth - 1));
    }
  }
}

}  // namespace

TEST(Parser, CorpusRoundTripsThroughFormat) {
  ASSERT_GE(corpus::expressions().size(), 30u);
  for (const auto& c : corpus::expressions()) {
    const Expr e = parse(c.text, c.n);
    const std::string canonical = format(e);
    const Expr again = parse(canonical, c.n);
    EXPECT_TRUE(e == again) << c.text << " -> " << canonical;
    EXPECT_EQ(format(again), canonical) << c.text;
  }
}

TEST(Parser, RandomTreesRoundTrip) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t dim = 2 + trial % 4;
    const Expr e(random_tree(rng, dim, 5), dim, VariableScheme::WithY);
    const Expr again = parse(format(e), dim);
    EXPECT_TRUE(e == again) << format(e);
  }
}

TEST(Parser, CanonicalForms) {
  EXPECT_EQ(format(parse("y^2 + x1*y", 2)), "((y^2)+(x1*y))");
  EXPECT_EQ(format(parse("-y^2", 2)), "(-(y^2))");
  EXPECT_EQ(format(parse("(-y)^2", 2)), "((-y)^2)");
  EXPECT_EQ(format(parse("y^-2", 2)), "(y^-2)");
  EXPECT_EQ(format(parse("x1-x2-y", 3)), "((x1-x2)-y)");
  EXPECT_EQ(format(parse("x1/x2/y", 3)), "((x1/x2)/y)");
  EXPECT_EQ(format(parse("sqrt(y)", 2)), "sqrt(y)");
  EXPECT_EQ(format(parse("0.3*y", 2)), "(0.3*y)");
  EXPECT_EQ(format(parse("x", 2)), "x1");
  EXPECT_EQ(format(parse_x_only("x1 + x2", 2)), "(x1+x2)");
}

TEST(Parser, UnaryMinusBindsLooserThanPower) {
  const std::vector<double> p{0.0, 3.0};
  EXPECT_EQ(eval_value(parse("-y^2", 2), p), -9.0);
  EXPECT_EQ(eval_value(parse("(-y)^2", 2), p), 9.0);
  EXPECT_EQ(eval_value(parse("2*-y", 2), p), -6.0);
}

TEST(Parser, PrecedenceAndAssociativity) {
  const std::vector<double> p{8.0, 4.0, 2.0};
  EXPECT_EQ(eval_value(parse("x1 - x2 - y", 3), p), 2.0);
  EXPECT_EQ(eval_value(parse("x1 / x2 / y", 3), p), 1.0);
  EXPECT_EQ(eval_value(parse("x1 + x2 * y", 3), p), 16.0);
  EXPECT_EQ(eval_value(parse("(x1 + x2) * y", 3), p), 24.0);
  EXPECT_EQ(eval_value(parse("2*y^3", 3), p), 16.0);
}

TEST(Parser, VariableSchemes) {
  const Expr e = parse("x1 + 2*x2 + 3*y", 3);
  EXPECT_EQ(eval_value(e, std::vector<double>{1, 1, 1}), 6.0);
  const Expr r = parse_x_only("x1 + 2*x2", 2);
  EXPECT_EQ(r.dim(), 2u);
  EXPECT_EQ(eval_value(r, std::vector<double>{1, 1}), 3.0);
  EXPECT_THROW(parse_x_only("y", 2), ParseError);
  EXPECT_THROW(parse("x", 3), ParseError);  // two x variables: bare x is ambiguous
  EXPECT_NO_THROW(parse_x_only("x", 1));
  EXPECT_THROW(parse("y", 1), InvalidArgument);
  EXPECT_THROW(parse_x_only("x1", 0), InvalidArgument);
}

TEST(Parser, ErrorOffsetsAndKinds) {
  struct Bad {
    const char* text;
    std::size_t n;
    ParseErrorKind kind;
    std::size_t offset;
  };
  const Bad cases[] = {
      {"y^2 + z", 2, ParseErrorKind::UnknownIdentifier, 6},
      {"y + x3", 3, ParseErrorKind::VariableOutOfRange, 4},
      {"x0 + y", 2, ParseErrorKind::UnknownIdentifier, 0},
      {"y^2.5", 2, ParseErrorKind::NonIntegerExponent, 2},
      {"y^x1", 2, ParseErrorKind::NonIntegerExponent, 2},
      {"y^65", 2, ParseErrorKind::ExponentTooLarge, 2},
      {"(y + 1", 2, ParseErrorKind::UnbalancedParentheses, 0},
      {"y + 1)", 2, ParseErrorKind::UnbalancedParentheses, 5},
      {"sqrt(y", 2, ParseErrorKind::UnbalancedParentheses, 4},
      {"y + ", 2, ParseErrorKind::UnexpectedEnd, 4},
      {"", 2, ParseErrorKind::UnexpectedEnd, 0},
      {"y # 2", 2, ParseErrorKind::Lexical, 2},
      {"1e+", 2, ParseErrorKind::Lexical, 1},
      {"y y", 2, ParseErrorKind::UnexpectedToken, 2},
      {"sqrt y", 2, ParseErrorKind::UnexpectedToken, 5},
      {"1e999", 2, ParseErrorKind::Lexical, 0},
  };
  for (const auto& b : cases) {
    const ParseError e = parse_error_of(b.text, b.n);
    EXPECT_EQ(e.kind(), b.kind) << b.text;
    EXPECT_EQ(e.offset(), b.offset) << b.text;
    EXPECT_NE(std::string(e.what()).find("offset " + std::to_string(b.offset)), std::string::npos)
        << e.what();
  }
}

TEST(Parser, OutOfRangeMessageListsValidVariables) {
  const ParseError e = parse_error_of("y + x3", 3);
  EXPECT_NE(std::string(e.what()).find("valid variables: x1, x2, y"), std::string::npos);
}

TEST(Parser, ExponentLimitIsInclusive) {
  EXPECT_NO_THROW(parse("y^64", 2));
  EXPECT_NO_THROW(parse("y^-64", 2));
  EXPECT_THROW(parse("y^-65", 2), ParseError);
}

TEST(Eval, ValueMatchesJetValueBitForBit) {
  std::mt19937_64 rng(3);
  for (const auto& c : corpus::expressions()) {
    const Expr e = parse(c.text, c.n);
    for (int trial = 0; trial < 10; ++trial) {
      const auto p = oracle::random_point(rng, c.n, 0.1, 1.0);
      double value = 0.0;
      try {
        value = eval(e, p).value();
      } catch (const Error&) {
        continue;
      }
      EXPECT_EQ(eval_value(e, p), value) << c.text;
    }
  }
}

TEST(Eval, JetMatchesFiniteDifferences) {
  std::mt19937_64 rng(9);
  for (const auto& c : corpus::expressions()) {
    if (std::string(c.text).find("^64") != std::string::npos) continue;  // FD ill-conditioned
    if (std::string(c.text).find("123456789") != std::string::npos) continue;
    const Expr e = parse(c.text, c.n);
    const auto p = oracle::random_point(rng, c.n, 0.2, 0.9);
    const Jet2 j = eval(e, p);
    const auto f = [&](std::span<const double> q) { return eval_value(e, q); };
    const auto g = oracle::fd_gradient(f, p);
    const auto H = oracle::fd_hessian(f, p);
    const double scale = 1.0 + std::abs(j.value());
    for (std::size_t i = 0; i < c.n; ++i) {
      EXPECT_NEAR(j.gradient(i), g[i], 1e-6 * scale) << c.text;
      for (std::size_t k = 0; k < c.n; ++k) {
        EXPECT_NEAR(j.hessian(i, k), H[i * c.n + k], 1e-3 * scale) << c.text;
      }
    }
  }
}

TEST(Eval, DimensionMismatchThrows) {
  const Expr e = parse("y", 3);
  EXPECT_THROW(eval(e, std::vector<double>{1, 2}), DimensionError);
  EXPECT_THROW(eval_value(e, std::vector<double>{1, 2}), DimensionError);
}

TEST(Ast, RejectsNegativeConstantsAndOutOfRangeVariables) {
  EXPECT_THROW(ast::constant(-1.0), InvalidArgument);
  EXPECT_THROW(ast::constant(std::nan("")), InvalidArgument);
  EXPECT_THROW(Expr(ast::variable(3), 3, VariableScheme::WithY), DimensionError);
}
