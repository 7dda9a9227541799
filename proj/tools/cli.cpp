#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "nijkit/construct.hpp"
#include "nijkit/error.hpp"
#include "nijkit/expr.hpp"
#include "nijkit/invariants.hpp"
#include "nijkit/singularity.hpp"
#include "nijkit/sweep.hpp"
#include "nijkit/torsion.hpp"

namespace nijkit::cli {

namespace {

using json = nlohmann::ordered_json;

/// Bad flag combination or value; reported with exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::optional<std::size_t> n;
  std::string family;
  std::string matrix;
  std::string f_text;
  std::string r_text;
  std::string sigma_text;
  std::string sign_text = "+1";
  std::string check = "all";
  std::vector<double> point_values;
  std::vector<double> box_values;
  std::size_t samples = 1000;
  bool samples_given = false;
  std::uint64_t seed = 42;
  std::optional<double> tol;
  std::optional<double> fd_step;
  double min_denominator = 0.05;
  std::size_t grid = 21;
  std::string format = "json";
  std::string out_path;
};

struct CheckOutcome {
  std::string name;
  VerificationReport report;
};

/// Rows of the CSV rendering; every cell is already formatted.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct Outcome {
  std::string subject;
  std::vector<CheckOutcome> checks;
  json results = json::object();
  Table table;
  std::vector<std::string> text;
  /// Commands without checks decide pass/fail themselves.
  std::optional<bool> pass_override;
};

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

json vec_json(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(number(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string vec_text(std::span<const double> v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt_short(v[i]);
  }
  return s + ")";
}

std::vector<std::string> point_header(std::size_t dim, bool with_y) {
  std::vector<std::string> h;
  for (std::size_t i = 0; i < dim; ++i) {
    h.push_back(with_y && i + 1 == dim ? "y" : "x" + std::to_string(i + 1));
  }
  return h;
}

std::vector<std::string> point_cells(std::span<const double> p) {
  std::vector<std::string> cells;
  for (double v : p) cells.push_back(fmt17(v));
  return cells;
}

int parse_sign(const std::string& s) {
  if (s == "+1" || s == "1" || s == "+") return 1;
  if (s == "-1" || s == "-") return -1;
  throw UsageError("--sign must be +1 or -1, got '" + s + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<Point> split_points(const std::vector<double>& values, std::size_t dim,
                                const char* what) {
  if (values.empty() || values.size() % dim != 0) {
    throw UsageError(std::string("--point needs a multiple of ") + std::to_string(dim) +
                     " coordinates (" + what + ")");
  }
  std::vector<Point> pts;
  for (std::size_t i = 0; i < values.size(); i += dim) {
    pts.emplace_back(values.begin() + static_cast<std::ptrdiff_t>(i),
                     values.begin() + static_cast<std::ptrdiff_t>(i + dim));
  }
  return pts;
}

Box make_box(const std::vector<double>& values, std::size_t dim) {
  Box b;
  if (values.empty()) {
    b = Box{std::vector<double>(dim, -1.0), std::vector<double>(dim, 1.0)};
  } else if (values.size() == 2) {
    b = Box{std::vector<double>(dim, values[0]), std::vector<double>(dim, values[1])};
  } else if (values.size() == 2 * dim) {
    for (std::size_t i = 0; i < dim; ++i) {
      b.lo.push_back(values[2 * i]);
      b.hi.push_back(values[2 * i + 1]);
    }
  } else {
    throw UsageError("--box takes 2 values (uniform) or " + std::to_string(2 * dim) +
                     " values (lo hi per axis)");
  }
  try {
    b.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  return b;
}

Box drop_last_axis(const Box& b) {
  Box x = b;
  x.lo.pop_back();
  x.hi.pop_back();
  return x;
}

// ---------------------------------------------------------------------------
// Operator resolution

struct OperatorSpec {
  std::optional<OperatorField> field;
  std::size_t n = 0;
  /// det-type function f(x1..x(n-1), y) for the families built from one.
  std::optional<ScalarField> f;
  /// Expected invariants, when the family prescribes them.
  std::optional<SigmaFields> sigma;
  bool pde_applicable = false;
};

std::size_t require_n(const RunConfig& cfg) {
  if (!cfg.n) throw UsageError("--n is required");
  if (*cfg.n < 2) throw UsageError("--n must be >= 2");
  return *cfg.n;
}

ScalarField parse_f(const RunConfig& cfg, std::size_t n) {
  if (cfg.f_text.empty()) throw UsageError("--f is required");
  return ScalarField::from_expr(parse(cfg.f_text, n));
}

ScalarField morse_square(std::size_t n, int sign) {
  NodePtr sq = ast::pow(ast::variable(n - 1), 2);
  if (sign < 0) sq = ast::neg(sq);
  return ScalarField::from_expr(Expr(sq, n, VariableScheme::WithY));
}

SigmaFields parse_sigma(const RunConfig& cfg) {
  if (cfg.sigma_text.empty()) throw UsageError("--sigma is required for this family");
  const auto parts = split(cfg.sigma_text, ',');
  const std::size_t n = parts.size();
  if (n < 2) throw UsageError("--sigma needs at least 2 expressions");
  if (cfg.n && *cfg.n != n) {
    throw UsageError("--sigma has " + std::to_string(n) + " expressions but --n is " +
                     std::to_string(*cfg.n));
  }
  std::vector<ScalarField> fields;
  for (const auto& part : parts) fields.push_back(ScalarField::from_expr(parse(trim(part), n)));
  return SigmaFields(std::move(fields));
}

OperatorField parse_matrix_literal(const std::string& text, std::optional<std::size_t> want_n) {
  const std::string body = trim(text);
  if (body.rfind("diag:", 0) == 0) {
    const auto parts = split(body.substr(5), ',');
    const std::size_t n = parts.size();
    if (n < 2) throw UsageError("diag: needs at least 2 entries");
    if (want_n && *want_n != n) throw UsageError("--matrix size differs from --n");
    std::vector<ScalarField> diag;
    for (const auto& part : parts) diag.push_back(ScalarField::from_expr(parse(trim(part), n)));
    return OperatorField::diagonal(std::move(diag), "diag(" + body.substr(5) + ")");
  }
  const auto rows = split(body, ';');
  const std::size_t n = rows.size();
  if (n < 2) throw UsageError("--matrix needs at least 2 rows separated by ';'");
  if (want_n && *want_n != n) throw UsageError("--matrix size differs from --n");
  std::vector<ScalarField> entries;
  for (const auto& row : rows) {
    const auto cells = split(row, ',');
    if (cells.size() != n) throw UsageError("--matrix rows must each have " + std::to_string(n) + " entries");
    for (const auto& cell : cells) entries.push_back(ScalarField::from_expr(parse(trim(cell), n)));
  }
  return OperatorField::from_entries(std::move(entries), "matrix[" + body + "]");
}

OperatorSpec resolve_operator(const RunConfig& cfg) {
  OperatorSpec spec;
  if (!cfg.matrix.empty()) {
    if (!cfg.family.empty()) throw UsageError("--matrix and --family are mutually exclusive");
    spec.field = parse_matrix_literal(cfg.matrix, cfg.n);
    spec.n = spec.field->dim();
    return spec;
  }
  if (cfg.family.empty()) throw UsageError("one of --family or --matrix is required");
  const std::string& fam = cfg.family;
  if (fam == "companion" || fam == "diffnondeg") {
    SigmaFields sigma = parse_sigma(cfg);
    spec.n = sigma.dim();
    spec.field = fam == "companion" ? build_companion(sigma) : build_diff_nondegenerate(sigma);
    spec.sigma = std::move(sigma);
  } else if (fam == "2d") {
    if (cfg.n && *cfg.n != 2) throw UsageError("family 2d is two-dimensional");
    spec.n = 2;
    spec.f = parse_f(cfg, 2);
    spec.field = build_planar(*spec.f);
    spec.sigma = planar_sigma(*spec.f);
  } else if (fam == "theorem1") {
    spec.n = require_n(cfg);
    spec.f = parse_f(cfg, spec.n);
    spec.field = build_determinant_family(*spec.f, spec.n);
    spec.sigma = coordinate_sigma(*spec.f);
    spec.pde_applicable = true;
  } else if (fam == "theorem2") {
    spec.n = require_n(cfg);
    if (spec.n < 3) throw UsageError("family theorem2 requires n > 2");
    const int sign = parse_sign(cfg.sign_text);
    spec.f = morse_square(spec.n, sign);
    spec.field = build_morse_canonical(spec.n, sign);
    spec.sigma = coordinate_sigma(*spec.f);
    spec.pde_applicable = true;
  } else {
    throw UsageError("unknown family '" + fam + "'");
  }
  return spec;
}

SweepOptions sweep_options(const RunConfig& cfg, std::size_t dim, double default_tol) {
  SweepOptions o;
  o.box = make_box(cfg.box_values, dim);
  o.samples = cfg.samples;
  o.seed = cfg.seed;
  o.tol = cfg.tol.value_or(default_tol);
  o.min_denominator = cfg.min_denominator;
  o.keep_records = cfg.format == "csv";
  if (o.samples < 1) throw UsageError("--samples must be >= 1");
  return o;
}

// ---------------------------------------------------------------------------
// Checks shared by verify and pde-check

VerificationReport pde_sweep(const ScalarField& R, std::size_t n, const SweepOptions& o) {
  return run_sweep("pde residuals of " + R.description(), o,
                   [&](std::span<const double> x) -> std::optional<PointOutcome> {
                     return PointOutcome{pde_residuals(R, n, x).max_required(), 1.0};
                   });
}

VerificationReport conjugation_sweep(const OperatorField& L, const SigmaFields& sigma,
                                     const SweepOptions& o) {
  return run_sweep("conjugation of " + L.provenance(), o,
                   [&](std::span<const double> p) -> std::optional<PointOutcome> {
                     if (near_singular(L, p, o.min_denominator)) return std::nullopt;
                     const ConjugationResidual r = conjugation_residual(L, sigma, p);
                     return PointOutcome{r.max_abs, 1.0 + r.magnitude};
                   });
}

ScalarField remainder_for(const RunConfig& cfg, const OperatorSpec& spec) {
  if (!cfg.r_text.empty()) {
    return ScalarField::from_expr(parse_x_only(cfg.r_text, spec.n - 1));
  }
  return morse_remainder(*spec.f);
}

void add_records(Table& table, const std::string& check, const VerificationReport& r,
                 std::size_t dim, bool with_y) {
  if (table.header.empty()) {
    table.header = {"check"};
    for (auto& h : point_header(dim, with_y)) table.header.push_back(h);
    table.header.insert(table.header.end(), {"residual", "relative", "accepted"});
  }
  for (const auto& rec : r.records) {
    std::vector<std::string> row{check};
    for (auto& c : point_cells(rec.point)) row.push_back(c);
    if (rec.point.size() < dim) row.resize(1 + dim, "");
    row.push_back(rec.accepted ? fmt17(rec.residual) : "");
    row.push_back(rec.accepted ? fmt17(rec.residual / rec.scale) : "");
    row.push_back(rec.accepted ? "1" : "0");
    table.rows.push_back(std::move(row));
  }
}

// ---------------------------------------------------------------------------
// Commands

Outcome cmd_verify(const RunConfig& cfg) {
  const OperatorSpec spec = resolve_operator(cfg);
  const std::size_t n = spec.n;
  const SweepOptions o = sweep_options(cfg, n, 1e-10);
  const bool all = cfg.check == "all";

  Outcome out;
  out.subject = "verify " + spec.field->provenance() + (spec.f ? " f=" + spec.f->description() : "");

  if (all || cfg.check == "torsion") {
    out.checks.push_back({"torsion", verify_zero_torsion(*spec.field, o)});
  }
  if (all || cfg.check == "conjugation") {
    if (spec.sigma) {
      out.checks.push_back({"conjugation", conjugation_sweep(*spec.field, *spec.sigma, o)});
    } else if (!all) {
      throw UsageError("check 'conjugation' needs a family with prescribed invariants");
    }
  }
  if (all || cfg.check == "sigma") {
    if (spec.sigma) {
      out.checks.push_back({"sigma", verify_sigma(*spec.field, *spec.sigma, o)});
    } else if (!all) {
      throw UsageError("check 'sigma' needs a family with prescribed invariants");
    }
  }
  // The remainder PDE only constrains operators that must extend across a
  // Morse singularity of f, so "all" includes it for the canonical family only.
  const bool pde_in_all = all && cfg.family == "theorem2";
  if (pde_in_all || cfg.check == "pde") {
    if (spec.pde_applicable) {
      SweepOptions xo = o;
      xo.box = drop_last_axis(o.box);
      out.checks.push_back({"pde", pde_sweep(remainder_for(cfg, spec), n, xo)});
    } else if (!all) {
      throw UsageError("check 'pde' needs family theorem1 or theorem2");
    }
  }
  for (const auto& c : out.checks) {
    add_records(out.table, c.name, c.report, n, true);
    out.text.push_back("check " + c.name + ": max " + fmt_short(c.report.max_residual) +
                       " (relative " + fmt_short(c.report.max_relative) + "), accepted " +
                       std::to_string(c.report.accepted) + ", rejected " +
                       std::to_string(c.report.rejected) + " -> " +
                       (c.report.pass ? "PASS" : "FAIL"));
  }
  return out;
}

Outcome cmd_torsion(const RunConfig& cfg) {
  const OperatorSpec spec = resolve_operator(cfg);
  const std::size_t n = spec.n;
  const auto points = split_points(cfg.point_values, n, "one per operator dimension");
  const double tol = cfg.tol.value_or(1e-10);

  Outcome out;
  out.subject = "torsion of " + spec.field->provenance();
  VerificationReport rep;
  rep.subject = out.subject;
  rep.tol = tol;
  json per_point = json::array();
  out.table.header = point_header(n, true);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      for (std::size_t k = 1; k <= n; ++k) {
        out.table.header.push_back("N" + std::to_string(i) + "_" + std::to_string(j) +
                                   std::to_string(k));
      }
    }
  }
  bool first = true;
  for (const auto& p : points) {
    const OperatorEval ev = operator_eval(*spec.field, p);
    const TorsionValue t = torsion_from_eval(ev, p);
    const double scale = 1.0 + max_abs(ev.values);
    const double m = t.max_abs();
    ++rep.samples;
    ++rep.accepted;
    rep.max_residual = std::max(rep.max_residual, m);
    if (first || m / scale > rep.max_relative) {
      rep.max_relative = m / scale;
      rep.worst_point = p;
      first = false;
    }

    json entry;
    entry["point"] = vec_json(p);
    entry["max"] = number(m);
    json comps = json::array();
    json nonzero = json::array();
    std::vector<std::string> row = point_cells(p);
    for (std::size_t i = 0; i < n; ++i) {
      json slab = json::array();
      for (std::size_t j = 0; j < n; ++j) {
        json line = json::array();
        for (std::size_t k = 0; k < n; ++k) {
          const double v = t(i, j, k);
          line.push_back(number(v));
          row.push_back(fmt17(v));
          if (j < k && std::abs(v) > tol * scale) {
            nonzero.push_back({{"i", i + 1}, {"j", j + 1}, {"k", k + 1}, {"value", number(v)}});
            out.text.push_back("  N^" + std::to_string(i + 1) + "_" + std::to_string(j + 1) +
                               std::to_string(k + 1) + " = " + fmt_short(v) + " at " +
                               vec_text(p));
          }
        }
        slab.push_back(std::move(line));
      }
      comps.push_back(std::move(slab));
    }
    entry["components"] = std::move(comps);
    entry["nonzero"] = std::move(nonzero);
    if (cfg.fd_step) {
      const TorsionValue oracle = torsion_bracket_fd(*spec.field, p, *cfg.fd_step);
      double diff = 0.0;
      for (std::size_t q = 0; q < t.components.size(); ++q) {
        diff = std::max(diff, std::abs(t.components[q] - oracle.components[q]));
      }
      entry["oracle_fd_step"] = *cfg.fd_step;
      entry["oracle_max_diff"] = number(diff);
      out.text.push_back("  bracket/finite-difference oracle differs by " + fmt_short(diff) +
                         " at " + vec_text(p));
    }
    per_point.push_back(std::move(entry));
    out.table.rows.push_back(std::move(row));
  }
  rep.pass = rep.max_relative <= tol;
  out.results["points"] = std::move(per_point);
  out.checks.push_back({"torsion", rep});
  out.text.insert(out.text.begin(), "max |N| = " + fmt_short(rep.max_residual) + " over " +
                                        std::to_string(points.size()) + " point(s)");
  return out;
}

Outcome cmd_construct(const RunConfig& cfg) {
  const OperatorSpec spec = resolve_operator(cfg);
  const std::size_t n = spec.n;
  std::vector<Point> points;
  if (!cfg.point_values.empty()) {
    points = split_points(cfg.point_values, n, "one per operator dimension");
  } else {
    // No explicit points: draw seeded points away from singular entries.
    const Box box = make_box(cfg.box_values, n);
    SampleStream stream(cfg.seed);
    const std::size_t want = cfg.samples_given ? cfg.samples : 5;
    for (std::size_t draws = 0; points.size() < want && draws < 100 * want + 100; ++draws) {
      Point p = stream.next(box);
      if (!near_singular(*spec.field, p, cfg.min_denominator)) points.push_back(std::move(p));
    }
    if (points.empty()) throw DomainEntirelySingular("no sampled point avoids singular entries");
  }
  Outcome out;
  out.subject = "construct " + spec.field->provenance();
  out.table.header = point_header(n, true);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      out.table.header.push_back("L" + std::to_string(i) + "_" + std::to_string(j));
    }
  }
  json per_point = json::array();
  for (const auto& p : points) {
    const Matrix m = operator_values(*spec.field, p);
    per_point.push_back({{"point", vec_json(p)}, {"matrix", matrix_json(m)}});
    std::vector<std::string> row = point_cells(p);
    for (double v : m.data()) row.push_back(fmt17(v));
    out.table.rows.push_back(std::move(row));
    out.text.push_back("L at " + vec_text(p) + ":");
    for (std::size_t i = 0; i < n; ++i) {
      std::string line = "  [";
      for (std::size_t j = 0; j < n; ++j) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%12.6g", m(i, j));
        line += buf;
      }
      out.text.push_back(line + " ]");
    }
  }
  out.results["points"] = std::move(per_point);
  out.pass_override = true;
  return out;
}

Outcome cmd_charpoly(const RunConfig& cfg) {
  const OperatorSpec spec = resolve_operator(cfg);
  const std::size_t n = spec.n;
  const auto points = split_points(cfg.point_values, n, "one per operator dimension");
  const double tol = cfg.tol.value_or(1e-9);
  Outcome out;
  out.subject = "charpoly of " + spec.field->provenance();
  out.table.header = point_header(n, true);
  for (std::size_t i = 1; i <= n; ++i) out.table.header.push_back("sigma" + std::to_string(i));
  json per_point = json::array();
  VerificationReport rep;
  rep.subject = out.subject;
  rep.tol = tol;
  bool first = true;
  for (const auto& p : points) {
    const Matrix m = operator_values(*spec.field, p);
    const CharPolyCoeffs c = charpoly(m);
    json entry{{"point", vec_json(p)}, {"sigma", vec_json(c.sigma)},
               {"determinant", number(c.determinant)},
               {"determinant_mismatch", number(c.determinant_mismatch())}};
    if (spec.sigma) {
      const auto want = spec.sigma->values(p);
      double dev = 0.0;
      for (std::size_t i = 0; i < n; ++i) dev = std::max(dev, std::abs(c.sigma[i] - want[i]));
      const double scale = 1.0 + max_abs(m);
      entry["expected"] = vec_json(want);
      entry["deviation"] = number(dev);
      ++rep.samples;
      ++rep.accepted;
      rep.max_residual = std::max(rep.max_residual, dev);
      if (first || dev / scale > rep.max_relative) {
        rep.max_relative = dev / scale;
        rep.worst_point = p;
        first = false;
      }
    }
    per_point.push_back(std::move(entry));
    std::vector<std::string> row = point_cells(p);
    for (double s : c.sigma) row.push_back(fmt17(s));
    out.table.rows.push_back(std::move(row));
    out.text.push_back("sigma at " + vec_text(p) + " = " + vec_text(c.sigma));
  }
  out.results["points"] = std::move(per_point);
  if (spec.sigma) {
    rep.pass = rep.max_relative <= tol;
    out.checks.push_back({"sigma", rep});
  } else {
    out.pass_override = true;
  }
  return out;
}

Outcome cmd_diagnose(const RunConfig& cfg) {
  const std::size_t n = require_n(cfg);
  const ScalarField f = parse_f(cfg, n);
  const auto points = split_points(cfg.point_values, n, "x1..x(n-1), y");
  Outcome out;
  out.subject = "smoothness diagnostics of f=" + f.description();
  out.table.header = point_header(n, true);
  out.table.header.push_back("N0");
  for (std::size_t j = 2; j + 1 <= n; ++j) out.table.header.push_back("N" + std::to_string(j));
  out.table.header.insert(out.table.header.end(), {"f_y", "verdict"});
  json per_point = json::array();
  bool obstructed = false;
  for (const auto& p : points) {
    const FractionDiagnostic d = smoothness_numerators(f, n, p);
    obstructed = obstructed || d.verdict == SmoothnessVerdict::Obstructed;
    per_point.push_back({{"point", vec_json(p)},
                         {"numerators", vec_json(d.numerators)},
                         {"denominator", number(d.denominator)},
                         {"verdict", std::string(verdict_name(d.verdict))}});
    std::vector<std::string> row = point_cells(p);
    for (double v : d.numerators) row.push_back(fmt17(v));
    row.push_back(fmt17(d.denominator));
    row.emplace_back(verdict_name(d.verdict));
    out.table.rows.push_back(std::move(row));
    out.text.push_back(vec_text(p) + ": " + std::string(verdict_name(d.verdict)) +
                       ", numerators " + vec_text(d.numerators) + ", f_y = " +
                       fmt_short(d.denominator));
  }
  out.results["points"] = std::move(per_point);
  out.pass_override = !obstructed;
  return out;
}

Outcome cmd_pde_check(const RunConfig& cfg) {
  const std::size_t n = require_n(cfg);
  std::optional<ScalarField> R;
  if (!cfg.r_text.empty()) {
    R = ScalarField::from_expr(parse_x_only(cfg.r_text, n - 1));
  } else if (!cfg.f_text.empty()) {
    R = morse_remainder(parse_f(cfg, n));
  } else {
    throw UsageError("pde-check needs --R or --f");
  }
  const double tol = cfg.tol.value_or(1e-10);
  Outcome out;
  out.subject = "pde residuals of R=" + R->description();

  if (cfg.point_values.empty()) {
    SweepOptions o = sweep_options(cfg, n - 1, tol);
    VerificationReport rep = pde_sweep(*R, n, o);
    add_records(out.table, "pde", rep, n - 1, false);
    out.text.push_back("max required residual " + fmt_short(rep.max_residual) + " over " +
                       std::to_string(rep.accepted) + " samples");
    out.checks.push_back({"pde", std::move(rep)});
    return out;
  }

  const auto points = split_points(cfg.point_values, n - 1, "x1..x(n-1)");
  out.table.header = point_header(n - 1, false);
  out.table.header.push_back("r0");
  for (std::size_t j = 2; j + 1 <= n; ++j) out.table.header.push_back("chain" + std::to_string(j));
  for (std::size_t i = 2; i + 1 <= n; ++i) out.table.header.push_back("relation" + std::to_string(i));
  out.table.header.push_back("factor2");
  VerificationReport rep;
  rep.subject = out.subject;
  rep.tol = tol;
  json per_point = json::array();
  bool first = true;
  for (const auto& x : points) {
    const PdeResiduals r = pde_residuals(*R, n, x);
    const double m = r.max_required();
    ++rep.samples;
    ++rep.accepted;
    rep.max_residual = std::max(rep.max_residual, m);
    if (first || m > rep.max_relative) {
      rep.max_relative = m;
      rep.worst_point = x;
      first = false;
    }
    per_point.push_back({{"point", vec_json(x)},
                         {"r0", number(r.r0)},
                         {"chain", vec_json(r.chain)},
                         {"relations", vec_json(r.relations)},
                         {"factor2", number(r.factor2)}});
    std::vector<std::string> row = point_cells(x);
    row.push_back(fmt17(r.r0));
    for (double v : r.chain) row.push_back(fmt17(v));
    for (double v : r.relations) row.push_back(fmt17(v));
    row.push_back(fmt17(r.factor2));
    out.table.rows.push_back(std::move(row));
    out.text.push_back(vec_text(x) + ": r0 = " + fmt_short(r.r0) + ", chain " +
                       vec_text(r.chain) + ", relations " + vec_text(r.relations) +
                       ", factor2 = " + fmt_short(r.factor2));
  }
  rep.pass = rep.max_relative <= tol;
  out.results["points"] = std::move(per_point);
  out.checks.push_back({"pde", std::move(rep)});
  return out;
}

Outcome cmd_morse_reduce(const RunConfig& cfg) {
  const std::size_t n = require_n(cfg);
  const ScalarField f = parse_f(cfg, n);
  Outcome out;
  out.subject = "Morse reduction of f=" + f.description();

  if (cfg.point_values.empty()) {
    GridSpec grid{make_box(cfg.box_values, n), cfg.grid};
    if (grid.points_per_axis < 2) throw UsageError("--grid must be >= 2");
    const double tol = cfg.tol.value_or(1e-9);
    VerificationReport rep = verify_morse_normal_form(f, n, grid, tol, cfg.format == "csv");
    add_records(out.table, "morse", rep, n, true);
    out.text.push_back("normal-form defect " + fmt_short(rep.max_residual) + " over " +
                       std::to_string(rep.samples) + " grid points");
    out.checks.push_back({"morse", std::move(rep)});
    return out;
  }

  const auto points = split_points(cfg.point_values, n - 1, "x1..x(n-1)");
  out.table.header = point_header(n - 1, false);
  out.table.header.insert(out.table.header.end(), {"c", "R", "sign", "newton_iters"});
  json per_point = json::array();
  for (const auto& x : points) {
    const MorseData m = morse_reduce(f, n, x);
    per_point.push_back({{"x", vec_json(x)},
                         {"c", number(m.c)},
                         {"R", number(m.R)},
                         {"sign", m.sign},
                         {"newton_iters", m.newton_iters}});
    std::vector<std::string> row = point_cells(x);
    row.push_back(fmt17(m.c));
    row.push_back(fmt17(m.R));
    row.push_back(std::to_string(m.sign));
    row.push_back(std::to_string(m.newton_iters));
    out.table.rows.push_back(std::move(row));
    out.text.push_back(vec_text(x) + ": c = " + fmt_short(m.c) + ", R = " + fmt_short(m.R) +
                       ", sign = " + (m.sign > 0 ? "+1" : "-1") + ", " +
                       std::to_string(m.newton_iters) + " Newton evaluations");
  }
  out.results["points"] = std::move(per_point);
  out.pass_override = true;
  return out;
}

// ---------------------------------------------------------------------------
// Report assembly

json params_json(const RunConfig& cfg) {
  auto opt_str = [](const std::string& s) -> json { return s.empty() ? json(nullptr) : json(s); };
  json p;
  p["command"] = cfg.command;
  p["n"] = cfg.n ? json(*cfg.n) : json(nullptr);
  p["family"] = opt_str(cfg.family);
  p["matrix"] = opt_str(cfg.matrix);
  p["f"] = opt_str(cfg.f_text);
  p["R"] = opt_str(cfg.r_text);
  p["sigma"] = opt_str(cfg.sigma_text);
  p["sign"] = cfg.sign_text;
  p["check"] = cfg.check;
  p["point"] = vec_json(cfg.point_values);
  p["box"] = vec_json(cfg.box_values);
  p["samples"] = cfg.samples;
  p["seed"] = cfg.seed;
  p["tol"] = cfg.tol ? number(*cfg.tol) : json(nullptr);
  p["fd_step"] = cfg.fd_step ? number(*cfg.fd_step) : json(nullptr);
  p["min_denominator"] = number(cfg.min_denominator);
  p["grid"] = cfg.grid;
  p["format"] = cfg.format;
  return p;
}

json base_report(const RunConfig& cfg, const std::string& subject) {
  json doc;
  doc["schema"] = 1;
  doc["subject"] = subject;
  doc["params"] = params_json(cfg);
  doc["accepted"] = 0;
  doc["rejected"] = 0;
  doc["max_residual"] = nullptr;
  doc["worst_point"] = nullptr;
  doc["checks"] = json::array();
  doc["pass"] = false;
  doc["exit_code"] = 0;
  doc["reason"] = nullptr;
  doc["results"] = json::object();
  doc["wall_ms"] = 0.0;
  return doc;
}

struct Emitted {
  json doc;
  Table table;
  std::vector<std::string> text;
};

Emitted assemble(const RunConfig& cfg, Outcome& outcome) {
  Emitted e;
  e.doc = base_report(cfg, outcome.subject);
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  double max_residual = 0.0;
  double worst_relative = -1.0;
  Point worst;
  bool pass = true;
  std::vector<std::string> failed;
  for (const auto& c : outcome.checks) {
    const auto& r = c.report;
    accepted += r.accepted;
    rejected += r.rejected;
    max_residual = std::max(max_residual, r.max_residual);
    if (r.max_relative > worst_relative) {
      worst_relative = r.max_relative;
      worst = r.worst_point;
    }
    if (!r.pass) {
      pass = false;
      failed.push_back(c.name);
    }
    e.doc["checks"].push_back({{"name", c.name},
                               {"max", number(r.max_residual)},
                               {"max_relative", number(r.max_relative)},
                               {"tol", number(r.tol)},
                               {"pass", r.pass},
                               {"accepted", r.accepted},
                               {"rejected", r.rejected},
                               {"worst_point", vec_json(r.worst_point)}});
  }
  if (outcome.pass_override) pass = pass && *outcome.pass_override;
  e.doc["accepted"] = accepted;
  e.doc["rejected"] = rejected;
  if (!outcome.checks.empty()) {
    e.doc["max_residual"] = number(max_residual);
    e.doc["worst_point"] = vec_json(worst);
  }
  e.doc["pass"] = pass;
  e.doc["exit_code"] = pass ? kPass : kChecksFailed;
  if (!pass) {
    std::string reason = "checks failed";
    if (!failed.empty()) {
      reason += ":";
      for (const auto& name : failed) reason += " " + name;
    } else if (cfg.command == "diagnose") {
      reason = "obstructed: a smoothness numerator is nonzero where f_y vanishes";
    }
    e.doc["reason"] = reason;
  }
  e.doc["results"] = std::move(outcome.results);
  e.table = std::move(outcome.table);
  e.text = std::move(outcome.text);
  return e;
}

void write_output(const RunConfig& cfg, const Emitted& e, std::ostream& out) {
  std::ostringstream buf;
  if (cfg.format == "csv" && !e.table.header.empty()) {
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) buf << (i ? "," : "") << cells[i];
      buf << '\n';
    };
    line(e.table.header);
    for (const auto& row : e.table.rows) line(row);
  } else if (cfg.format == "text") {
    buf << e.doc["subject"].get<std::string>() << '\n';
    for (const auto& t : e.text) buf << t << '\n';
    if (!e.doc["reason"].is_null()) buf << "reason: " << e.doc["reason"].get<std::string>() << '\n';
    buf << "result: " << (e.doc["pass"].get<bool>() ? "PASS" : "FAIL") << '\n';
  } else {
    buf << e.doc.dump(2) << '\n';
  }
  if (cfg.out_path.empty()) {
    out << buf.str();
    return;
  }
  std::ofstream file(cfg.out_path, std::ios::binary);
  if (!file) throw UsageError("cannot open --out path '" + cfg.out_path + "'");
  file << buf.str();
}

int fail(const RunConfig& cfg, int code, const std::string& reason, double wall_ms,
         std::ostream& out, std::ostream& err) {
  err << "nijkit: " << reason << '\n';
  Emitted e;
  e.doc = base_report(cfg, cfg.command.empty() ? "usage" : cfg.command);
  e.doc["exit_code"] = code;
  e.doc["reason"] = reason;
  e.doc["wall_ms"] = wall_ms;
  RunConfig json_cfg = cfg;
  if (json_cfg.format == "csv") json_cfg.format = "json";
  try {
    write_output(json_cfg, e, out);
  } catch (const std::exception& ex) {
    err << "nijkit: " << ex.what() << '\n';
    out << e.doc.dump(2) << '\n';
  }
  return code;
}

void add_operator_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--family", cfg.family, "Operator family")
      ->check(CLI::IsMember({"companion", "diffnondeg", "2d", "theorem1", "theorem2"}));
  sub->add_option("--matrix", cfg.matrix,
                  "Operator literal: 'diag:e1,...,en' or 'e11,e12;e21,e22' (row-major)");
  sub->add_option("--sigma", cfg.sigma_text, "Comma-separated invariants sigma_1..sigma_n");
  sub->add_option("--sign", cfg.sign_text, "Sign of y^2 for family theorem2 (+1 or -1)");
}

void add_f_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--n", cfg.n, "Dimension");
  sub->add_option("--f", cfg.f_text, "f(x1..x(n-1), y)");
}

void add_output_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--format", cfg.format, "Output format")
      ->check(CLI::IsMember({"json", "csv", "text"}));
  sub->add_option("--out", cfg.out_path, "Write the report here instead of stdout");
}

void add_sweep_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--box", cfg.box_values, "lo hi (uniform) or lo1 hi1 lo2 hi2 ...");
  sub->add_option("--samples", cfg.samples, "Number of sampled points");
  sub->add_option("--seed", cfg.seed, "PRNG seed");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
  };

  RunConfig cfg;
  CLI::App app{"nijkit: construct and verify Nijenhuis operator families", "nijkit"};
  app.require_subcommand(1, 1);

  auto* construct = app.add_subcommand("construct", "Evaluate an operator family at points");
  auto* torsion = app.add_subcommand("torsion", "Nijenhuis torsion at points");
  auto* verify = app.add_subcommand("verify", "Seeded verification sweep");
  auto* charpoly_cmd = app.add_subcommand("charpoly", "Characteristic polynomial coefficients");
  auto* diagnose = app.add_subcommand("diagnose", "Smoothness-fraction diagnostics");
  auto* pde = app.add_subcommand("pde-check", "Residuals of the remainder PDE system");
  auto* morse = app.add_subcommand("morse-reduce", "Parametric Morse reduction of f");

  for (auto* sub : {construct, torsion, verify, charpoly_cmd}) {
    add_operator_options(sub, cfg);
    add_f_options(sub, cfg);
    add_output_options(sub, cfg);
  }
  for (auto* sub : {diagnose, pde, morse}) {
    add_f_options(sub, cfg);
    add_output_options(sub, cfg);
  }
  for (auto* sub : {construct, torsion, charpoly_cmd, diagnose, pde, morse}) {
    sub->add_option("--point", cfg.point_values, "Point coordinates; repeat for more points");
  }
  for (auto* sub : {torsion, verify, charpoly_cmd, pde, morse}) {
    sub->add_option("--tol", cfg.tol, "Tolerance");
  }
  for (auto* sub : {torsion, verify}) {
    sub->add_option("--fd-step", cfg.fd_step, "Finite-difference step for the bracket oracle");
  }
  for (auto* sub : {verify, pde}) add_sweep_options(sub, cfg);
  add_sweep_options(construct, cfg);
  morse->add_option("--box", cfg.box_values, "Grid bounds: lo hi or per axis");
  morse->add_option("--grid", cfg.grid, "Grid points per axis");
  verify->add_option("--check", cfg.check, "Which check to run")
      ->check(CLI::IsMember({"torsion", "conjugation", "sigma", "pde", "all"}));
  verify->add_option("--R", cfg.r_text, "Remainder R(x1..x(n-1)) for the pde check");
  verify->add_option("--min-denominator", cfg.min_denominator,
                     "Reject samples where the regularity marker (|f_y| or |det J|) is below this");
  pde->add_option("--R", cfg.r_text, "Remainder R(x1..x(n-1))");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kPass;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kPass;
  } catch (const CLI::ParseError& e) {
    for (auto* sub : app.get_subcommands()) cfg.command = sub->get_name();
    return fail(cfg, kUsageError, std::string("usage: ") + e.what(), elapsed_ms(), out, err);
  }
  cfg.command = app.get_subcommands().front()->get_name();
  if (const auto* opt = app.get_subcommands().front()->get_option_no_throw("--samples")) {
    cfg.samples_given = opt->count() > 0;
  }

  try {
    Outcome outcome;
    if (cfg.command == "verify") {
      outcome = cmd_verify(cfg);
    } else if (cfg.command == "torsion") {
      outcome = cmd_torsion(cfg);
    } else if (cfg.command == "construct") {
      outcome = cmd_construct(cfg);
    } else if (cfg.command == "charpoly") {
      outcome = cmd_charpoly(cfg);
    } else if (cfg.command == "diagnose") {
      outcome = cmd_diagnose(cfg);
    } else if (cfg.command == "pde-check") {
      outcome = cmd_pde_check(cfg);
    } else {
      outcome = cmd_morse_reduce(cfg);
    }
    Emitted e = assemble(cfg, outcome);
    e.doc["wall_ms"] = elapsed_ms();
    write_output(cfg, e, out);
    return e.doc["exit_code"].get<int>();
  } catch (const UsageError& e) {
    return fail(cfg, kUsageError, std::string("usage: ") + e.what(), elapsed_ms(), out, err);
  } catch (const ParseError& e) {
    return fail(cfg, kUsageError, e.what(), elapsed_ms(), out, err);
  } catch (const InvalidArgument& e) {
    return fail(cfg, kUsageError, e.what(), elapsed_ms(), out, err);
  } catch (const DimensionError& e) {
    return fail(cfg, kUsageError, e.what(), elapsed_ms(), out, err);
  } catch (const Error& e) {
    return fail(cfg, kNumericalFailure, std::string("numerical failure: ") + e.what(),
                elapsed_ms(), out, err);
  } catch (const std::exception& e) {
    return fail(cfg, kNumericalFailure, std::string("internal error: ") + e.what(),
                elapsed_ms(), out, err);
  }
}

}  // namespace nijkit::cli
