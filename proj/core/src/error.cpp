#include "nijkit/error.hpp"

#include <sstream>

namespace nijkit {

namespace {

std::string format_value(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

DenominatorVanishes::DenominatorVanishes(double denominator)
    : Error("denominator vanishes (value " + format_value(denominator) + ")"),
      denominator_(denominator) {}

SingularEntry::SingularEntry(std::size_t row, std::size_t col, double denominator)
    : Error("denominator vanishes at entry (" + std::to_string(row + 1) + "," +
            std::to_string(col + 1) + ") (value " + format_value(denominator) +
            ")"),
      row_(row),
      col_(col),
      denominator_(denominator) {}

DegeneratePoint::DegeneratePoint(double det)
    : Error("differentially degenerate at point (det J = " + format_value(det) +
            ")"),
      det_(det) {}

NonMorseCritical::NonMorseCritical(double second_derivative)
    : Error("non-Morse critical point (f_yy = " + format_value(second_derivative) +
            ")"),
      second_derivative_(second_derivative) {}

}  // namespace nijkit
