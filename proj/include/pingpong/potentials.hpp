#pragma once

// Potential energy curves, transition dipole functions and the two-state
// electronic system they form. Everything is in Hartree atomic units.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "pingpong/errors.hpp"
#include "pingpong/spline.hpp"
#include "pingpong/units.hpp"

namespace pingpong {

/// The two coupled electronic states. X is the state holding the initial
/// and target levels; A is the intermediate (excited) state.
enum class Electronic { X, A };

inline std::string_view to_string(Electronic e) { return e == Electronic::X ? "X" : "A"; }

inline Electronic partner(Electronic e) {
  return e == Electronic::X ? Electronic::A : Electronic::X;
}

inline Electronic parse_electronic(std::string_view s) {
  if (s == "X") return Electronic::X;
  if (s == "A") return Electronic::A;
  throw ParseError("unknown electronic state tag '" + std::string(s) + "' (expected X or A)");
}

/// U(R) = Te + De (1 - exp(-a (R - Re)))^2
struct MorseParams {
  double De = 0.0;
  double a = 0.0;
  double Re = 0.0;
  double Te = 0.0;
};

/// What to do when a tabulated function is evaluated outside its nodes.
enum class Extrapolation {
  kPhysical,  // steep repulsive power law below the first node, flat beyond the last
  kNone,      // DomainError
};

class PotentialCurve {
 public:
  static PotentialCurve morse(std::string label, MorseParams p) {
    if (!(p.De > 0.0) || !(p.a > 0.0) || !(p.Re > 0.0)) {
      throw DomainError("Morse curve '" + label + "': De, a and Re must be positive");
    }
    PotentialCurve c;
    c.label_ = std::move(label);
    c.form_ = p;
    return c;
  }

  static PotentialCurve tabulated(std::string label, std::vector<double> r, std::vector<double> u,
                                  Extrapolation rule = Extrapolation::kPhysical) {
    PotentialCurve c;
    c.label_ = std::move(label);
    Table t{CubicSpline(std::move(r), std::move(u)), rule, 0.0};
    // Inner wall: U0 + K ((R0/R)^12 - 1), slope-matched when the table is
    // already repulsive at its first node.
    const double r0 = t.spline.front();
    const double slope = t.spline.derivative(r0);
    t.wall = std::max(-slope * r0 / 12.0, 1e-3);
    c.form_ = std::move(t);
    return c;
  }

  const std::string& label() const { return label_; }
  bool is_morse() const { return std::holds_alternative<MorseParams>(form_); }
  std::optional<MorseParams> morse_params() const {
    if (auto p = std::get_if<MorseParams>(&form_)) return *p;
    return std::nullopt;
  }

  double operator()(double r) const {
    if (auto p = std::get_if<MorseParams>(&form_)) {
      const double x = 1.0 - std::exp(-p->a * (r - p->Re));
      return p->Te + p->De * x * x;
    }
    const auto& t = std::get<Table>(form_);
    const double lo = t.spline.front();
    const double hi = t.spline.back();
    if (r >= lo && r <= hi) return t.spline(r);
    if (t.rule == Extrapolation::kNone) {
      throw DomainError("curve '" + label_ + "' evaluated at R=" + std::to_string(r) +
                        " outside its tabulated interval");
    }
    if (r > hi) return t.spline.values().back();
    const double u0 = t.spline.values().front();
    return u0 + t.wall * (std::pow(lo / r, 12) - 1.0);
  }

  /// U(R -> infinity); the dissociation limit used to flag bound levels.
  double asymptote() const {
    if (auto p = std::get_if<MorseParams>(&form_)) return p->Te + p->De;
    return std::get<Table>(form_).spline.values().back();
  }

  /// Interval on which the curve is defined without extrapolation.
  std::pair<double, double> validity() const {
    if (is_morse()) return {0.0, std::numeric_limits<double>::infinity()};
    const auto& t = std::get<Table>(form_);
    if (t.rule == Extrapolation::kPhysical) return {0.0, std::numeric_limits<double>::infinity()};
    return {t.spline.front(), t.spline.back()};
  }

 private:
  struct Table {
    CubicSpline spline;
    Extrapolation rule;
    double wall;
  };
  std::string label_;
  std::variant<MorseParams, Table> form_;
};

/// Transition dipole moment d(R) between the two electronic states.
class DipoleFunction {
 public:
  struct Constant {
    double value;
  };
  /// c0 + c1 R
  struct Linear {
    double c0;
    double c1;
  };
  /// c0 + amplitude exp(-((R - center)/width)^2)
  struct Gaussian {
    double c0;
    double amplitude;
    double center;
    double width;
  };

  static DipoleFunction constant(double value) { return DipoleFunction(Constant{value}); }
  static DipoleFunction linear(double c0, double c1) { return DipoleFunction(Linear{c0, c1}); }
  static DipoleFunction gaussian(double c0, double amplitude, double center, double width) {
    if (!(width > 0.0)) throw DomainError("Gaussian dipole: width must be positive");
    return DipoleFunction(Gaussian{c0, amplitude, center, width});
  }
  /// Spline through the nodes, held constant outside them.
  static DipoleFunction tabulated(std::vector<double> r, std::vector<double> d) {
    return DipoleFunction(CubicSpline(std::move(r), std::move(d)));
  }

  double operator()(double r) const {
    return std::visit(
        [r](const auto& f) -> double {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Constant>) {
            return f.value;
          } else if constexpr (std::is_same_v<T, Linear>) {
            return f.c0 + f.c1 * r;
          } else if constexpr (std::is_same_v<T, Gaussian>) {
            const double x = (r - f.center) / f.width;
            return f.c0 + f.amplitude * std::exp(-x * x);
          } else {
            if (r <= f.front()) return f.values().front();
            if (r >= f.back()) return f.values().back();
            return f(r);
          }
        },
        form_);
  }

 private:
  using Form = std::variant<Constant, Linear, Gaussian, CubicSpline>;
  explicit DipoleFunction(Form f) : form_(std::move(f)) {}
  Form form_;
};

/// Reduced mass, the two curves and the transition dipole coupling them.
class ElectronicSystem {
 public:
  /// `mu` in electron masses.
  ElectronicSystem(double mu, PotentialCurve x, PotentialCurve a, DipoleFunction d)
      : mu_(mu), x_(std::move(x)), a_(std::move(a)), d_(std::move(d)) {
    if (!(mu_ > 0.0)) throw DomainError("reduced mass must be positive");
  }

  double mu() const { return mu_; }
  const PotentialCurve& curve(Electronic e) const { return e == Electronic::X ? x_ : a_; }
  const DipoleFunction& dipole() const { return d_; }

  /// Intersection of the validity intervals of both curves.
  std::pair<double, double> validity() const {
    auto [lx, hx] = x_.validity();
    auto [la, ha] = a_.validity();
    return {std::max(lx, la), std::min(hx, ha)};
  }

 private:
  double mu_;
  PotentialCurve x_;
  PotentialCurve a_;
  DipoleFunction d_;
};

/// V_J(R) = J(J+1)/(2 mu R^2) + U(R)
inline double effective_potential(const PotentialCurve& curve, double mu, int J, double r) {
  if (!(r > 0.0)) throw DomainError("effective potential requires R > 0");
  if (J < 0) throw DomainError("rotational quantum number must be non-negative");
  const double jj = static_cast<double>(J) * (J + 1);
  return jj / (2.0 * mu * r * r) + curve(r);
}

// ---------------------------------------------------------------------------
// Table ingestion

enum class TableKind { kEnergy, kDipole };

struct Table {
  std::vector<double> r;       // bohr
  std::vector<double> values;  // hartree or e*a0
};

namespace detail {

inline double length_factor(std::string_view unit) {
  if (unit == "bohr" || unit == "au" || unit == "a0") return 1.0;
  if (unit == "angstrom" || unit == "A" || unit == "Angstrom") return 1.0 / units::kBohrToAngstrom;
  throw ParseError("unknown length unit '" + std::string(unit) + "'");
}

inline double value_factor(std::string_view unit, TableKind kind) {
  if (kind == TableKind::kEnergy) {
    if (unit == "hartree" || unit == "au" || unit == "Eh") return 1.0;
    if (unit == "cm-1" || unit == "cm^-1") return 1.0 / units::kHartreeToWavenumber;
    if (unit == "eV" || unit == "ev") return 1.0 / units::kHartreeToEv;
  } else {
    if (unit == "au" || unit == "ea0") return 1.0;
    if (unit == "debye" || unit == "D") return units::kDebyeToAu;
  }
  throw ParseError("unknown " + std::string(kind == TableKind::kEnergy ? "energy" : "dipole") +
                   " unit '" + std::string(unit) + "'");
}

}  // namespace detail

/// Reads a two-column table with a `units: <R-unit> <value-unit>` header and
/// `#` comments, converting to atomic units.
inline Table read_table(std::istream& in, TableKind kind, const std::string& name = "<stream>") {
  Table t;
  std::optional<std::pair<double, double>> factors;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first == "units:") {
      std::string ru, vu;
      if (!(ls >> ru >> vu)) throw ParseError(name + ":" + std::to_string(lineno) + ": bad units header");
      factors = {detail::length_factor(ru), detail::value_factor(vu, kind)};
      continue;
    }
    if (!factors) throw ParseError(name + ": missing 'units: <R-unit> <value-unit>' header");
    std::istringstream row(line);
    double r = 0.0, v = 0.0;
    std::string extra;
    if (!(row >> r >> v) || (row >> extra) || !std::isfinite(r) || !std::isfinite(v)) {
      throw ParseError(name + ":" + std::to_string(lineno) + ": expected two numeric columns");
    }
    r *= factors->first;
    if (!t.r.empty() && !(r > t.r.back())) {
      throw ParseError(name + ":" + std::to_string(lineno) + ": R values must be strictly increasing");
    }
    t.r.push_back(r);
    t.values.push_back(v * factors->second);
  }
  if (t.r.size() < 4) throw ParseError(name + ": at least 4 data rows are required");
  return t;
}

inline Table read_table_file(const std::string& path, TableKind kind) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open table file '" + path + "'");
  return read_table(in, kind, path);
}

inline PotentialCurve load_curve_table(const std::string& path, std::string label,
                                       Extrapolation rule = Extrapolation::kPhysical) {
  auto t = read_table_file(path, TableKind::kEnergy);
  return PotentialCurve::tabulated(std::move(label), std::move(t.r), std::move(t.values), rule);
}

inline DipoleFunction load_dipole_table(const std::string& path) {
  auto t = read_table_file(path, TableKind::kDipole);
  return DipoleFunction::tabulated(std::move(t.r), std::move(t.values));
}

// ---------------------------------------------------------------------------
// Analytic Morse spectrum

struct MorseSpectrum {
  std::vector<double> energies;  // relative to the well minimum
  bool truncated = false;        // fewer bound levels than requested
};

/// E_n = w (n+1/2) - w^2 (n+1/2)^2 / (4 De), w = a sqrt(2 De / mu), for the
/// bound levels n + 1/2 < sqrt(2 mu De)/a.
inline MorseSpectrum morse_levels(double De, double a, double Re, double mu, int count) {
  if (!(De > 0.0) || !(a > 0.0) || !(Re > 0.0) || !(mu > 0.0)) {
    throw DomainError("morse_levels: De, a, Re and mu must be positive");
  }
  const double w = a * std::sqrt(2.0 * De / mu);
  const double lambda = std::sqrt(2.0 * mu * De) / a;
  MorseSpectrum s;
  for (int n = 0; n < count; ++n) {
    const double x = n + 0.5;
    if (!(x < lambda)) {
      s.truncated = true;
      break;
    }
    s.energies.push_back(w * x - w * w * x * x / (4.0 * De));
  }
  return s;
}

inline int morse_bound_count(double De, double a, double mu) {
  const double lambda = std::sqrt(2.0 * mu * De) / a;
  return static_cast<int>(std::ceil(lambda - 0.5));
}

}  // namespace pingpong
