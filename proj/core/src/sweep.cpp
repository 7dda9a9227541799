#include "nijkit/sweep.hpp"

#include <cmath>
#include <utility>

#include "nijkit/error.hpp"

namespace nijkit {

Box Box::uniform(std::size_t n, double lo, double hi) {
  Box b{std::vector<double>(n, lo), std::vector<double>(n, hi)};
  b.validate();
  return b;
}

void Box::validate() const {
  if (lo.empty() || lo.size() != hi.size()) {
    throw InvalidArgument("box bounds must be non-empty and of equal length");
  }
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || !(lo[i] < hi[i])) {
      throw InvalidArgument("box axis " + std::to_string(i + 1) +
                            " needs finite bounds with low < high");
    }
  }
}

double SampleStream::uniform(double lo, double hi) {
  const double u = static_cast<double>(rng_() >> 11U) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

Point SampleStream::next(const Box& box) {
  Point p(box.dim());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = uniform(box.lo[i], box.hi[i]);
  return p;
}

VerificationReport run_sweep(
    std::string subject, const SweepOptions& options,
    const std::function<std::optional<PointOutcome>(std::span<const double>)>& evaluate) {
  if (options.samples < 1) throw InvalidArgument("sample count must be >= 1");
  options.box.validate();

  VerificationReport report;
  report.subject = std::move(subject);
  report.seed = options.seed;
  report.tol = options.tol;
  report.samples = options.samples;

  SampleStream stream(options.seed);
  bool first = true;
  for (std::size_t s = 0; s < options.samples; ++s) {
    Point p = stream.next(options.box);
    SampleRecord record;
    std::optional<PointOutcome> outcome;
    try {
      outcome = evaluate(p);
      if (!outcome) record.note = "near singular locus";
    } catch (const Error& e) {
      record.note = e.what();
    }
    if (!outcome) {
      ++report.rejected;
    } else {
      ++report.accepted;
      record.accepted = true;
      record.residual = outcome->residual;
      record.scale = outcome->scale;
      double relative = outcome->residual / outcome->scale;
      if (std::isnan(relative)) relative = HUGE_VAL;
      report.max_residual = std::max(report.max_residual, std::isnan(outcome->residual) ? HUGE_VAL : outcome->residual);
      if (first || relative > report.max_relative) {
        report.max_relative = relative;
        report.worst_point = p;
        first = false;
      }
    }
    if (options.keep_records) {
      record.point = std::move(p);
      report.records.push_back(std::move(record));
    }
  }
  if (report.accepted == 0) {
    throw DomainEntirelySingular("all " + std::to_string(options.samples) +
                                 " sampled points were rejected for " + report.subject);
  }
  report.pass = report.max_relative <= options.tol;
  return report;
}

bool near_singular(const OperatorField& L, std::span<const double> p, double threshold) {
  if (!L.regularity()) return false;
  return std::abs((*L.regularity())(p).value()) < threshold;
}

}  // namespace nijkit
