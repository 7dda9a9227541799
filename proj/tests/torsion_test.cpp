#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nijkit/construct.hpp"
#include "nijkit/error.hpp"
#include "nijkit/expr.hpp"
#include "nijkit/torsion.hpp"
#include "oracles.hpp"

using namespace nijkit;

namespace {

ScalarField sf(const std::string& text, std::size_t n) {
  return ScalarField::from_expr(parse(text, n));
}

OperatorField literal(const std::vector<std::string>& entries, std::size_t n) {
  std::vector<ScalarField> fs;
  for (const auto& e : entries) fs.push_back(sf(e, n));
  return OperatorField::from_entries(std::move(fs), "literal");
}

oracle::MatFn as_matfn(const OperatorField& L) {
  return [L](std::span<const double> p) {
    const Matrix m = operator_values(L, p);
    return std::vector<double>(m.data().begin(), m.data().end());
  };
}

SweepOptions box_options(std::size_t n, std::size_t samples = 300) {
  SweepOptions o;
  o.box = Box::uniform(n, -1, 1);
  o.samples = samples;
  o.seed = 42;
  o.tol = 1e-10;
  return o;
}

}  // namespace

TEST(Torsion, DiagonalCounterexampleHandValues) {
  const OperatorField L = OperatorField::diagonal({sf("y", 2), sf("x", 2)}, "diag(y,x)");
  const std::vector<double> p{1.0, 2.0};
  const TorsionValue t = torsion_coordinate(L, p);
  EXPECT_EQ(t(0, 0, 1), 1.0);   // N^1_12 = y - x
  EXPECT_EQ(t(0, 1, 0), -1.0);
  EXPECT_EQ(t(1, 0, 1), 1.0);   // N^2_12 = y - x
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(t(i, 0, 0), 0.0);
    EXPECT_EQ(t(i, 1, 1), 0.0);
  }
  EXPECT_EQ(t.max_abs(), 1.0);
}

TEST(Torsion, AntisymmetricInLowerIndices) {
  const OperatorField L =
      literal({"x1*y", "sin(x2)", "y^2", "x1 - x2", "exp(y)", "x2*x1", "1", "y*x1^2", "cos(x1)"}, 3);
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    const auto p = oracle::random_point(rng, 3);
    const TorsionValue N = torsion_coordinate(L, p);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(N(i, j, k), -N(i, k, j));
  }
}

TEST(Torsion, CoordinateFormulaMatchesFiniteDifferenceOracle) {
  const OperatorField L =
      literal({"x1*y", "sin(x2)", "y^2", "x1 - x2", "exp(y)", "x2*x1", "1", "y*x1^2", "cos(x1)"}, 3);
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    const auto p = oracle::random_point(rng, 3);
    const TorsionValue N = torsion_coordinate(L, p);
    const auto want = oracle::fd_torsion(as_matfn(L), p);
    EXPECT_LT(oracle::max_abs_diff(N.components, want), 1e-8);
  }
}

TEST(Torsion, BracketOracleConvergesQuadratically) {
  const OperatorField L = literal({"exp(x1*y)", "sin(y)", "cos(x1) + y^3", "x1/(2 + y)"}, 2);
  const std::vector<double> p{0.3, -0.4};
  const TorsionValue exact = torsion_coordinate(L, p);
  double prev = 0.0;
  for (double h : {1e-2, 5e-3, 2.5e-3}) {
    const double d = oracle::max_abs_diff(exact.components, torsion_bracket_fd(L, p, h).components);
    if (prev > 0.0) EXPECT_GE(prev / d, 3.5) << "h = " << h;
    prev = d;
  }
  EXPECT_LT(oracle::max_abs_diff(exact.components, torsion_bracket_fd(L, p, 1e-4).components), 1e-6);
  EXPECT_THROW(torsion_bracket_fd(L, p, 0.0), InvalidArgument);
}

TEST(Torsion, LieBracketOfLinearFields) {
  // X = x d_y, Y = y d_x: [X, Y] = x d_x - y d_y.
  const VectorField X = [](std::span<const double> q) { return std::vector<double>{0.0, q[0]}; };
  const VectorField Y = [](std::span<const double> q) { return std::vector<double>{q[1], 0.0}; };
  const auto b = lie_bracket_fd(X, Y, std::vector<double>{0.7, -0.2}, 1e-3);
  EXPECT_NEAR(b[0], 0.7, 1e-12);
  EXPECT_NEAR(b[1], 0.2, 1e-12);
}

TEST(Torsion, ShiftByIdentityLeavesTorsionUnchanged) {
  const OperatorField L = literal({"exp(x1*y)", "sin(y)", "cos(x1) + y^3", "x1/(2 + y)"}, 2);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const auto p = oracle::random_point(rng, 2);
    const auto a = torsion_coordinate(L, p).components;
    const auto b = torsion_coordinate(L.shifted(3.0), p).components;
    EXPECT_LT(oracle::max_abs_diff(a, b), 1e-13);
  }
}

TEST(Torsion, ConstantOperatorIsNijenhuis) {
  Matrix c(3, 3, std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 10});
  EXPECT_EQ(torsion_coordinate(OperatorField::constant(c), std::vector<double>{1, 2, 3}).max_abs(),
            0.0);
}

TEST(Torsion, MorseCanonicalFamilyIsExactlyNijenhuis) {
  for (std::size_t n = 3; n <= 6; ++n) {
    for (int sign : {1, -1}) {
      const auto r = verify_zero_torsion(build_morse_canonical(n, sign), box_options(n));
      EXPECT_TRUE(r.pass);
      EXPECT_LE(r.max_residual, 1e-12);
      EXPECT_EQ(r.rejected, 0u);
    }
  }
}

TEST(Torsion, DeterminantFamilyIsNijenhuis) {
  for (std::size_t n = 2; n <= 5; ++n) {
    for (std::string f : {"y", "y^3 + y + x1", "exp(y) + x1*y", "y^2 + 0.3*y + sin(x1)"}) {
      if (n >= 3) f += " + x1*x" + std::to_string(n - 1);
      const auto r = verify_zero_torsion(build_determinant_family(sf(f, n), n), box_options(n));
      EXPECT_TRUE(r.pass) << f << " n=" << n << " max " << r.max_relative;
      EXPECT_GT(r.accepted, 200u);
    }
  }
}

TEST(Torsion, ConjugatedCompanionIsNijenhuis) {
  const SigmaFields sigma({sf("x1 + y^2", 3), sf("sin(x2) + x1", 3), sf("exp(y) + x1*x2", 3)});
  const auto r = verify_zero_torsion(build_diff_nondegenerate(sigma), box_options(3));
  EXPECT_TRUE(r.pass) << r.max_relative;
  const auto c = verify_zero_torsion(build_companion(coordinate_sigma(sf("y^2 + x1*y", 3))),
                                     box_options(3));
  EXPECT_FALSE(c.pass);  // the companion form in non-invariant coordinates is not Nijenhuis
}

TEST(Torsion, PlanarFamilyIsNijenhuis) {
  for (const char* f : {"y", "y^3 + y + x", "exp(y) + x*x*y"}) {
    const auto r = verify_zero_torsion(build_planar(sf(f, 2)), box_options(2));
    EXPECT_TRUE(r.pass) << f;
  }
}

TEST(Torsion, DiagonalCounterexampleFailsSweep) {
  const OperatorField L = OperatorField::diagonal({sf("y", 2), sf("x", 2)}, "diag(y,x)");
  SweepOptions o = box_options(2, 500);
  o.keep_records = true;
  const auto r = verify_zero_torsion(L, o);
  EXPECT_FALSE(r.pass);
  double want = 0.0;
  for (const auto& rec : r.records) want = std::max(want, std::abs(rec.point[1] - rec.point[0]));
  EXPECT_NEAR(r.max_residual, want, 1e-12);
}

TEST(Torsion, SweepRejectsSingularSamplesAndFailsWhenNothingRemains) {
  const OperatorField L = build_determinant_family(sf("y^2", 3), 3);
  SweepOptions o = box_options(3);
  o.min_denominator = 0.5;
  const auto r = verify_zero_torsion(L, o);
  EXPECT_GT(r.rejected, 0u);
  EXPECT_EQ(r.accepted + r.rejected, r.samples);
  o.min_denominator = 100.0;
  EXPECT_THROW(verify_zero_torsion(L, o), DomainEntirelySingular);
}

TEST(Torsion, SweepIsDeterministic) {
  const OperatorField L = build_determinant_family(sf("y^3 + y + x1*x2", 3), 3);
  const auto a = verify_zero_torsion(L, box_options(3));
  const auto b = verify_zero_torsion(L, box_options(3));
  EXPECT_EQ(a.max_residual, b.max_residual);
  EXPECT_EQ(a.worst_point, b.worst_point);
  EXPECT_EQ(a.accepted, b.accepted);
}
