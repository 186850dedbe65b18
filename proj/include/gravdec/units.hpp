#pragma once

// Physical constants and the handful of units that appear at I/O boundaries.
// Everything inside the library is SI.

#include <cmath>
#include <string>
#include <string_view>

#include "gravdec/error.hpp"

namespace gravdec {

struct PhysicalConstants {
  double G = 6.674e-11;     // m^3 kg^-1 s^-2
  double hbar = 1.0546e-34; // J s
  double c = 2.998e8;       // m s^-1

  static PhysicalConstants si() { return {}; }
  /// hbar = G = c = 1, used for dimensionless Schrodinger-Newton runs.
  static PhysicalConstants unit() { return {1.0, 1.0, 1.0}; }

  void validate() const {
    require(G > 0 && std::isfinite(G), "constants: G must be positive");
    require(hbar > 0 && std::isfinite(hbar), "constants: hbar must be positive");
    require(c > 0 && std::isfinite(c), "constants: c must be positive");
  }

  /// hbar*c/cm in joules: the energy unit Delta is quoted in.
  double hbar_c_per_cm() const { return hbar * c / 1e-2; }
};

enum class Unit { m, cm, kg, g, s, J, dimensionless };

struct Quantity {
  double value = 0.0;
  Unit unit = Unit::dimensionless;
};

inline std::string_view unit_name(Unit u) {
  switch (u) {
    case Unit::m: return "m";
    case Unit::cm: return "cm";
    case Unit::kg: return "kg";
    case Unit::g: return "g";
    case Unit::s: return "s";
    case Unit::J: return "J";
    case Unit::dimensionless: return "dimensionless";
  }
  return "?";
}

inline Unit parse_unit(std::string_view tag) {
  if (tag == "m") return Unit::m;
  if (tag == "cm") return Unit::cm;
  if (tag == "kg") return Unit::kg;
  if (tag == "g") return Unit::g;
  if (tag == "s") return Unit::s;
  if (tag == "J") return Unit::J;
  if (tag == "dimensionless" || tag == "1" || tag.empty()) return Unit::dimensionless;
  throw InvalidInput("unknown unit tag '" + std::string(tag) + "'");
}

/// SI unit that `u` converts to.
inline Unit si_unit(Unit u) {
  switch (u) {
    case Unit::cm: return Unit::m;
    case Unit::g: return Unit::kg;
    default: return u;
  }
}

/// Factor f with value_si = f * value.
inline double si_factor(Unit u) {
  switch (u) {
    case Unit::cm: return 1e-2;
    case Unit::g: return 1e-3;
    case Unit::m:
    case Unit::kg:
    case Unit::s:
    case Unit::J:
    case Unit::dimensionless: return 1.0;
  }
  throw InvalidInput("unknown unit");
}

// Division by the inverse power of ten keeps cm->m and g->kg correctly
// rounded (1 cm -> 0.01 m exactly as the literal 0.01).
inline Quantity to_si(Quantity q) {
  switch (q.unit) {
    case Unit::cm: return {q.value / 100.0, Unit::m};
    case Unit::g: return {q.value / 1000.0, Unit::kg};
    case Unit::m:
    case Unit::kg:
    case Unit::s:
    case Unit::J:
    case Unit::dimensionless: return q;
  }
  throw InvalidInput("unknown unit");
}

/// Express an SI value in `target` (which must share its dimension).
inline Quantity from_si(double value_si, Unit target) {
  switch (target) {
    case Unit::cm: return {value_si * 100.0, Unit::cm};
    case Unit::g: return {value_si * 1000.0, Unit::g};
    case Unit::m:
    case Unit::kg:
    case Unit::s:
    case Unit::J:
    case Unit::dimensionless: return {value_si, target};
  }
  throw InvalidInput("unknown unit");
}

inline double in_si(double value, Unit unit) { return to_si({value, unit}).value; }

}  // namespace gravdec
