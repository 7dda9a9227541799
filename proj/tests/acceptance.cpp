// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are fixed
// here and printed next to the measured value.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "corpus.hpp"
#include "json.hpp"
#include "nijkit/construct.hpp"
#include "nijkit/error.hpp"
#include "nijkit/expr.hpp"
#include "nijkit/invariants.hpp"
#include "nijkit/singularity.hpp"
#include "nijkit/torsion.hpp"
#include "oracles.hpp"

using namespace nijkit;

namespace {

// Pinned tolerances.
constexpr double kMorseTorsionAbs = 1e-12;
constexpr double kDeterminantTorsionRel = 1e-10;
constexpr double kConjugationRel = 1e-11;
constexpr double kOracleAgreement = 1e-6;
constexpr double kOracleStep = 1e-4;
constexpr double kConvergenceRatio = 3.5;
constexpr double kFdExactFloor = 1e-9;
constexpr double kOracleRegularFy = 0.5;
constexpr double kSigmaAbs = 1e-9;
constexpr double kWorkedSigmaAbs = 1e-12;
constexpr double kCounterexampleAbs = 1e-9;
constexpr double kPdeZeroAbs = 1e-14;
constexpr double kPdeLinearAbs = 1e-12;
constexpr double kObstructionFloor = 1e-6;
constexpr double kMorseRecoveryAbs = 1e-10;
constexpr double kMorseDefectAbs = 1e-9;
constexpr double kNumeratorAbs = 1e-12;
constexpr double kMinDenominator = 0.05;
constexpr std::size_t kSamples = 1000;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

ScalarField sf(const std::string& text, std::size_t n) {
  return ScalarField::from_expr(parse(text, n));
}

ScalarField rx(const std::string& text, std::size_t m) {
  return ScalarField::from_expr(parse_x_only(text, m));
}

SweepOptions sweep(std::size_t n, double tol, std::uint64_t seed = 42) {
  SweepOptions o;
  o.box = Box::uniform(n, -1.0, 1.0);
  o.samples = kSamples;
  o.seed = seed;
  o.tol = tol;
  o.min_denominator = kMinDenominator;
  return o;
}

/// The determinant-family f set used by several criteria, restricted to the
/// dimensions where every variable it mentions exists.
std::vector<std::pair<std::string, std::size_t>> determinant_cases() {
  std::vector<std::pair<std::string, std::size_t>> cases;
  for (std::size_t n : {2u, 3u, 4u}) {
    cases.emplace_back("y", n);
    cases.emplace_back("y^3 + y + x1", n);
    if (n >= 3) cases.emplace_back("y^2 + x1*x2 + 0.3*y", n);
  }
  return cases;
}

Outcome ac1() {
  Outcome o;
  double worst = 0.0;
  for (std::size_t n : {3u, 4u, 5u}) {
    for (int sign : {1, -1}) {
      const auto r = verify_zero_torsion(build_morse_canonical(n, sign), sweep(n, kMorseTorsionAbs));
      worst = std::max(worst, r.max_residual);
      o.pass = o.pass && r.accepted == kSamples && r.max_residual <= kMorseTorsionAbs;
    }
  }
  o.detail = "max |N| = " + sci(worst) + " <= " + sci(kMorseTorsionAbs) + " (n = 3,4,5, both signs)";
  return o;
}

Outcome ac2() {
  Outcome o;
  double worst = 0.0;
  std::size_t rejected = 0;
  for (const auto& [f, n] : determinant_cases()) {
    const auto r = verify_zero_torsion(build_determinant_family(sf(f, n), n),
                                       sweep(n, kDeterminantTorsionRel));
    worst = std::max(worst, r.max_relative);
    rejected += r.rejected;
    o.pass = o.pass && r.pass;
  }
  o.detail = "max relative |N| = " + sci(worst) + " <= " + sci(kDeterminantTorsionRel) + ", " +
             std::to_string(rejected) + " samples rejected for |f_y| < " + sci(kMinDenominator);
  return o;
}

Outcome ac3() {
  Outcome o;
  std::mt19937_64 rng(2024);
  const std::vector<std::string> pool{"y", "y^3 + y + x1", "y^2 + x1*y + 0.3*y", "exp(y) + x1*x1",
                                      "sin(y) + 2*y + x1*y^2", "y^5 - y + x1^2*y"};
  std::uniform_int_distribution<std::size_t> pick_n(2, 6);
  std::uniform_int_distribution<std::size_t> pick_f(0, pool.size() - 1);
  double worst = 0.0;
  int done = 0;
  while (done < 100) {
    const std::size_t n = pick_n(rng);
    std::string text = pool[pick_f(rng)];
    if (n >= 3) text += " + x" + std::to_string(n - 1) + "*x1*y";
    const ScalarField f = sf(text, n);
    const auto p = oracle::random_point(rng, n);
    if (std::abs(f(p).gradient(n - 1)) < 0.1) continue;
    const double rel = verify_conjugation(f, n, p).relative();
    worst = std::max(worst, rel);
    o.pass = o.pass && rel <= kConjugationRel;
    ++done;
  }
  o.detail = "max relative |JL - companion J| = " + sci(worst) + " <= " + sci(kConjugationRel) +
             " over 100 triples, n in 2..6";
  return o;
}

Outcome ac4() {
  Outcome o;
  struct Subject {
    std::string name;
    OperatorField L;
    std::function<double(std::span<const double>)> fy;
  };
  std::vector<Subject> subjects;
  for (std::size_t n : {3u, 4u, 5u}) {
    for (int sign : {1, -1}) {
      subjects.push_back({"morse n=" + std::to_string(n), build_morse_canonical(n, sign), nullptr});
    }
  }
  for (const auto& [text, n] : determinant_cases()) {
    const ScalarField f = sf(text, n);
    const std::size_t yi = n - 1;
    subjects.push_back({"det " + text, build_determinant_family(f, n),
                        [f, yi](std::span<const double> p) { return f(p).gradient(yi); }});
  }
  subjects.push_back(
      {"diag(y,x)", OperatorField::diagonal({sf("y", 2), sf("x", 2)}, "diag(y,x)"), nullptr});

  double worst_gap = 0.0;
  double worst_ratio = HUGE_VAL;
  int converging = 0;
  int exact = 0;
  for (const auto& s : subjects) {
    const std::size_t n = s.L.dim();
    SampleStream stream(7);
    int points = 0;
    for (int draw = 0; draw < 1000 && points < 20; ++draw) {
      const Point p = stream.next(Box::uniform(n, -1, 1));
      if (s.fy && std::abs(s.fy(p)) < kOracleRegularFy) continue;
      ++points;
      const auto exact_t = torsion_coordinate(s.L, p).components;
      double d[3];
      double h = kOracleStep;
      for (double& di : d) {
        di = oracle::max_abs_diff(exact_t, torsion_bracket_fd(s.L, p, h).components);
        h /= 2;
      }
      worst_gap = std::max(worst_gap, d[0]);
      o.pass = o.pass && d[0] <= kOracleAgreement;
      if (d[0] > kFdExactFloor) {
        // Truncation error dominates: it must fall like h^2.
        ++converging;
        for (int k = 0; k < 2; ++k) {
          const double ratio = d[k] / d[k + 1];
          worst_ratio = std::min(worst_ratio, ratio);
          o.pass = o.pass && ratio >= kConvergenceRatio;
        }
      } else {
        // Central differences are exact on these entries; only rounding remains.
        ++exact;
        o.pass = o.pass && d[1] <= kFdExactFloor && d[2] <= kFdExactFloor;
      }
    }
    o.pass = o.pass && points == 20;
  }
  o.detail = "max gap at h=1e-4 " + sci(worst_gap) + " <= " + sci(kOracleAgreement) +
             "; min halving ratio " + sci(worst_ratio) + " >= " + sci(kConvergenceRatio) + " over " +
             std::to_string(converging) + " points (" + std::to_string(exact) +
             " points FD-exact, gaps <= " + sci(kFdExactFloor) + ")";
  if (converging == 0) o.pass = false;
  return o;
}

Outcome ac5() {
  Outcome o;
  double worst = 0.0;
  for (std::size_t n : {3u, 4u}) {
    for (const auto& [text, dim] : determinant_cases()) {
      if (dim != n) continue;
      const ScalarField f = sf(text, n);
      const auto r = verify_sigma_coords(build_determinant_family(f, n), f, n, sweep(n, kSigmaAbs));
      worst = std::max(worst, r.max_residual);
      o.pass = o.pass && r.max_residual <= kSigmaAbs;
    }
    for (int sign : {1, -1}) {
      const ScalarField f = sf(sign > 0 ? "y^2" : "-y^2", n);
      const auto r = verify_sigma_coords(build_morse_canonical(n, sign), f, n, sweep(n, kSigmaAbs));
      worst = std::max(worst, r.max_residual);
      o.pass = o.pass && r.max_residual <= kSigmaAbs && r.accepted == kSamples;
    }
  }
  const Matrix m = operator_values(build_determinant_family(sf("y^2", 3), 3),
                                   std::vector<double>{1, -1, 2});
  const auto c = charpoly(m);
  const double worked = oracle::max_abs_diff(c.sigma, std::vector<double>{1, -1, 4});
  o.pass = o.pass && worked <= kWorkedSigmaAbs;
  o.detail = "max |sigma - (x, f)| = " + sci(worst) + " <= " + sci(kSigmaAbs) +
             "; worked value off by " + sci(worked) + " <= " + sci(kWorkedSigmaAbs);
  return o;
}

Outcome ac6() {
  Outcome o;
  SweepOptions opts = sweep(2, 1e-10);
  opts.keep_records = true;
  const auto r = verify_zero_torsion(OperatorField::diagonal({sf("y", 2), sf("x", 2)}, "diag(y,x)"), opts);
  double want = 0.0;
  for (const auto& rec : r.records) want = std::max(want, std::abs(rec.point[1] - rec.point[0]));
  const double gap = std::abs(r.max_residual - want);
  o.pass = !r.pass && gap <= kCounterexampleAbs;
  o.detail = std::string("sweep ") + (r.pass ? "passed" : "failed") + "; max |N| " +
             sci(r.max_residual) + " vs max |y - x| " + sci(want) + ", gap " + sci(gap) +
             " <= " + sci(kCounterexampleAbs);
  return o;
}

Outcome ac7() {
  Outcome o;
  std::mt19937_64 rng(77);
  double zero = 0.0;
  for (std::size_t n : {3u, 4u, 5u}) {
    const ScalarField R = rx("0", n - 1);
    for (int t = 0; t < 100; ++t) {
      zero = std::max(zero, pde_residuals(R, n, oracle::random_point(rng, n - 1)).max_required());
    }
  }
  double quarter = 0.0;
  const ScalarField Q = rx("x*x/4", 1);
  for (int t = 0; t < 100; ++t) {
    quarter = std::max(quarter, std::abs(pde_residuals(Q, 2, oracle::random_point(rng, 1)).r0));
  }
  double linear = 0.0;
  for (std::size_t n : {3u, 4u}) {
    const ScalarField R = rx("x1 + x" + std::to_string(n - 1), n - 1);
    for (int t = 0; t < 100; ++t) {
      linear = std::max(linear, std::abs(pde_residuals(R, n, oracle::random_point(rng, n - 1)).r0 + 1.0));
    }
  }
  o.pass = zero <= kPdeZeroAbs && quarter <= kPdeZeroAbs && linear <= kPdeLinearAbs;
  o.detail = "R=0: " + sci(zero) + ", R=x^2/4: " + sci(quarter) + " (<= " + sci(kPdeZeroAbs) +
             "); R=x1+x(n-1): |r0 + 1| " + sci(linear) + " <= " + sci(kPdeLinearAbs);
  return o;
}

Outcome ac8() {
  Outcome o;
  std::mt19937_64 rng(88);
  std::uniform_real_distribution<double> u(-1, 1);
  const std::vector<std::string> linear{"1", "x1", "x2"};
  const std::vector<std::string> quadratic{"1", "x1", "x2", "x1^2", "x1*x2", "x2^2"};
  double weakest = HUGE_VAL;
  int tested = 0;
  for (const auto* basis : {&linear, &quadratic}) {
    for (int t = 0; t < 50; ++t) {
      std::vector<double> c(basis->size());
      double norm2 = 0.0;
      do {
        norm2 = 0.0;
        for (auto& v : c) {
          v = u(rng);
          norm2 += v * v;
        }
      } while (norm2 < 0.01);
      std::vector<NodePtr> terms;
      NodePtr sum = ast::constant(0.0);
      for (std::size_t k = 0; k < c.size(); ++k) {
        const NodePtr mono = parse_x_only((*basis)[k], 2).root_ptr();
        const NodePtr term = ast::mul(ast::constant(std::abs(c[k])), mono);
        sum = c[k] < 0 ? ast::sub(sum, term) : ast::add(sum, term);
      }
      const ScalarField R = ScalarField::from_expr(Expr(sum, 2, VariableScheme::XOnly));
      const double r = pde_residuals(R, 3, oracle::random_point(rng, 2)).max_required();
      weakest = std::min(weakest, r);
      o.pass = o.pass && r > kObstructionFloor;
      ++tested;
    }
  }
  const double zero = pde_residuals(rx("0", 2), 3, oracle::random_point(rng, 2)).max_required();
  o.pass = o.pass && tested == 100 && zero == 0.0;
  o.detail = "smallest residual over 100 nonzero R = " + sci(weakest) + " > " + sci(kObstructionFloor) +
             "; R = 0 residual " + sci(zero);
  return o;
}

Outcome ac9() {
  Outcome o;
  const ScalarField f = sf("y^2 + x1*y", 2);
  double worst = 0.0;
  for (int i = 0; i < 21; ++i) {
    const double x = -1.0 + 2.0 * i / 20.0;
    const MorseData m = morse_reduce(f, 2, std::vector<double>{x});
    worst = std::max({worst, std::abs(m.c + x / 2), std::abs(m.R + x * x / 4)});
    o.pass = o.pass && m.sign == 1;
  }
  const auto grid = verify_morse_normal_form(f, 2, GridSpec{Box::uniform(2, -1, 1), 21}, kMorseDefectAbs);
  bool rejected = false;
  try {
    morse_reduce(sf("y^3", 2), 2, std::vector<double>{0.0});
  } catch (const NonMorseCritical&) {
    rejected = true;
  }
  o.pass = o.pass && worst <= kMorseRecoveryAbs && grid.max_residual <= kMorseDefectAbs && rejected;
  o.detail = "c, R off by " + sci(worst) + " <= " + sci(kMorseRecoveryAbs) + "; defect " +
             sci(grid.max_residual) + " <= " + sci(kMorseDefectAbs) + "; y^3 " +
             (rejected ? "rejected as non-Morse" : "NOT rejected");
  return o;
}

Outcome ac10() {
  Outcome o;
  const auto a = smoothness_numerators(sf("y^2", 3), 3, std::vector<double>{0.3, -0.4, 0.0});
  const auto b = smoothness_numerators(sf("y^2 + x1", 3), 3, std::vector<double>{0.3, -0.4, 0.0});
  const double n2 = std::abs(b.numerators.at(1) - 1.0);
  o.pass = a.verdict == SmoothnessVerdict::SingularZeroNumerators &&
           b.verdict == SmoothnessVerdict::Obstructed && n2 <= kNumeratorAbs;
  o.detail = "y^2: " + std::string(verdict_name(a.verdict)) + "; y^2 + x1: " +
             std::string(verdict_name(b.verdict)) + " with |N_2 - 1| = " + sci(n2) + " <= " +
             sci(kNumeratorAbs);
  return o;
}

Outcome ac11() {
  Outcome o;
  int round_trips = 0;
  for (const auto& c : corpus::expressions()) {
    const Expr e = parse(c.text, c.n);
    if (e == parse(format(e), c.n)) ++round_trips;
  }
  const std::size_t total = corpus::expressions().size();
  o.pass = total >= 30 && round_trips == static_cast<int>(total);

  struct Bad {
    const char* text;
    std::size_t offset;
  };
  const Bad bad[] = {{"y + z", 4}, {"x4 + y", 0}, {"y^1.5", 2}, {"y^x1", 2}, {"y^99", 2},
                     {"(y + 1", 0}, {"y + 1)", 5}, {"sqrt(y", 4}};
  int with_offset = 0;
  for (const auto& b : bad) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run({"verify", "--family", "theorem1", "--n", "3", "--f", b.text}, out, err);
    const auto doc = nlohmann::json::parse(out.str());
    const std::string reason = doc.value("reason", "");
    if (code == cli::kUsageError &&
        reason.find("offset " + std::to_string(b.offset)) != std::string::npos) {
      ++with_offset;
    }
  }
  o.pass = o.pass && with_offset == static_cast<int>(std::size(bad));
  o.detail = std::to_string(round_trips) + "/" + std::to_string(total) + " corpus round trips; " +
             std::to_string(with_offset) + "/" + std::to_string(std::size(bad)) +
             " malformed inputs exit 2 with offset";
  return o;
}

Outcome ac12() {
  Outcome o;
  const std::vector<std::vector<std::string>> runs{
      {"verify", "--family", "theorem1", "--n", "3", "--f", "y^2 + x1*x2 + 0.3*y", "--seed", "9"},
      {"verify", "--family", "theorem2", "--n", "4", "--sign", "-1", "--seed", "3"},
      {"verify", "--matrix", "diag:y,x", "--seed", "1"},
      {"verify", "--family", "2d", "--f", "y^3 + y + x", "--format", "csv"},
  };
  int identical = 0;
  for (const auto& args : runs) {
    std::string reports[2];
    for (auto& rep : reports) {
      std::ostringstream out;
      std::ostringstream err;
      cli::run(args, out, err);
      rep = out.str();
      if (rep.front() == '{') {
        auto doc = nlohmann::json::parse(rep);
        doc.erase("wall_ms");
        rep = doc.dump();
      }
    }
    if (reports[0] == reports[1] && !reports[0].empty()) ++identical;
  }
  o.pass = identical == static_cast<int>(runs.size());
  o.detail = std::to_string(identical) + "/" + std::to_string(runs.size()) +
             " repeated verify runs byte-identical (wall_ms excluded)";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"AC1  Morse canonical family torsion", ac1},
      {"AC2  determinant family torsion", ac2},
      {"AC3  conjugation identity", ac3},
      {"AC4  coordinate vs bracket torsion", ac4},
      {"AC5  invariant recovery", ac5},
      {"AC6  diag(y,x) negative control", ac6},
      {"AC7  remainder PDE residuals", ac7},
      {"AC8  obstruction witness", ac8},
      {"AC9  Morse reduction", ac9},
      {"AC10 smoothness diagnostics", ac10},
      {"AC11 parser round trip and errors", ac11},
      {"AC12 verify determinism", ac12},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s  %-38s %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
    if (!o.pass) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
