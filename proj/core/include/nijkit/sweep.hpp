#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "nijkit/field.hpp"

namespace nijkit {

/// Axis-aligned box lo[i] < hi[i].
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  static Box uniform(std::size_t n, double lo, double hi);
  std::size_t dim() const noexcept { return lo.size(); }
  /// Throws InvalidArgument unless the bounds are finite and ordered.
  void validate() const;
};

/// Reproducible stream of uniform points from a seeded 64-bit generator.
/// The mapping from generator output to coordinates is fixed here (53 high
/// bits, affine map) so the stream is identical across standard libraries.
class SampleStream {
 public:
  explicit SampleStream(std::uint64_t seed) : rng_(seed) {}
  Point next(const Box& box);
  double uniform(double lo, double hi);

 private:
  std::mt19937_64 rng_;
};

struct SweepOptions {
  Box box;
  std::size_t samples = 1000;
  std::uint64_t seed = 42;
  /// Relative tolerance: a point passes when residual <= tol * scale.
  double tol = 1e-11;
  /// Points where |regularity marker| < min_denominator are rejected.
  double min_denominator = 0.05;
  bool keep_records = false;
};

struct SampleRecord {
  Point point;
  bool accepted = false;
  double residual = 0.0;
  double scale = 1.0;
  std::string note;
};

struct VerificationReport {
  std::string subject;
  std::uint64_t seed = 0;
  double tol = 0.0;
  std::size_t samples = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  /// Largest raw residual over accepted points.
  double max_residual = 0.0;
  /// Largest residual / scale over accepted points.
  double max_relative = 0.0;
  /// Point attaining max_relative.
  Point worst_point;
  bool pass = false;
  std::vector<SampleRecord> records;
};

struct PointOutcome {
  double residual = 0.0;
  double scale = 1.0;
};

/// Draws options.samples points and evaluates each. A point is rejected when
/// `evaluate` returns nullopt or throws nijkit::Error. Throws
/// DomainEntirelySingular when nothing is accepted.
VerificationReport run_sweep(std::string subject, const SweepOptions& options,
                             const std::function<std::optional<PointOutcome>(
                                 std::span<const double>)>& evaluate);

/// True when the field has a regularity marker smaller than the threshold at p.
bool near_singular(const OperatorField& L, std::span<const double> p, double threshold);

}  // namespace nijkit
