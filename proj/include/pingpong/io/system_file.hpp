#pragma once

// System description files:
//
//   [system]
//   mu_amu = 1.0            # or mu = <electron masses>
//   [X]
//   type = "morse"          # De, a, Re, Te in atomic units
//   De = 0.06
//   ...
//   [A]
//   type = "table"
//   file = "a_state.dat"    # relative to this file
//   extrapolation = "physical"
//   [dipole]
//   type = "gaussian"       # constant | linear | gaussian | table

#include <filesystem>
#include <string>

#include "pingpong/io/ini.hpp"
#include "pingpong/potentials.hpp"
#include "pingpong/units.hpp"

namespace pingpong::io {

namespace detail {

inline PotentialCurve curve_from_section(const IniFile& f, const std::string& label) {
  if (!f.has_section(label)) throw ConfigError(f.path().string() + ": missing section [" + label + "]");
  const std::string type = f.get_string(label, "type", "morse");
  if (type == "morse") {
    f.check_keys(label, {"type", "De", "a", "Re", "Te"});
    MorseParams p{f.require_double(label, "De"), f.require_double(label, "a"), f.require_double(label, "Re"),
                  f.get_double(label, "Te", 0.0)};
    try {
      return PotentialCurve::morse(label, p);
    } catch (const DomainError& e) {
      throw ConfigError(f.path().string() + ": " + e.what());
    }
  }
  if (type == "table") {
    f.check_keys(label, {"type", "file", "extrapolation"});
    auto path = f.get_path(label, "file");
    if (!path) throw ConfigError(f.path().string() + ": [" + label + "] needs file");
    const std::string rule = f.get_string(label, "extrapolation", "physical");
    Extrapolation ex;
    if (rule == "physical") {
      ex = Extrapolation::kPhysical;
    } else if (rule == "none") {
      ex = Extrapolation::kNone;
    } else {
      throw ConfigError(f.path().string() + ": unknown extrapolation '" + rule + "'");
    }
    return load_curve_table(path->string(), label, ex);
  }
  throw ConfigError(f.path().string() + ": [" + label + "] has unknown type '" + type + "'");
}

inline DipoleFunction dipole_from_section(const IniFile& f) {
  const std::string s = "dipole";
  if (!f.has_section(s)) throw ConfigError(f.path().string() + ": missing section [dipole]");
  const std::string type = f.get_string(s, "type", "constant");
  try {
    if (type == "constant") {
      f.check_keys(s, {"type", "value"});
      return DipoleFunction::constant(f.require_double(s, "value"));
    }
    if (type == "linear") {
      f.check_keys(s, {"type", "c0", "c1"});
      return DipoleFunction::linear(f.require_double(s, "c0"), f.require_double(s, "c1"));
    }
    if (type == "gaussian") {
      f.check_keys(s, {"type", "c0", "amplitude", "center", "width"});
      return DipoleFunction::gaussian(f.require_double(s, "c0"), f.require_double(s, "amplitude"),
                                      f.require_double(s, "center"), f.require_double(s, "width"));
    }
  } catch (const DomainError& e) {
    throw ConfigError(f.path().string() + ": " + e.what());
  }
  if (type == "table") {
    f.check_keys(s, {"type", "file"});
    auto path = f.get_path(s, "file");
    if (!path) throw ConfigError(f.path().string() + ": [dipole] needs file");
    return load_dipole_table(path->string());
  }
  throw ConfigError(f.path().string() + ": [dipole] has unknown type '" + type + "'");
}

}  // namespace detail

inline ElectronicSystem load_system(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("system file '" + path.string() + "' does not exist");
  const auto f = IniFile::load(path);
  f.check_sections({"system", "X", "A", "dipole"});
  f.check_keys("system", {"mu_amu", "mu", "name"});
  double mu = 0.0;
  if (auto m = f.get_double("system", "mu_amu")) {
    mu = units::amu(*m);
  } else if (auto me = f.get_double("system", "mu")) {
    mu = *me;
  } else {
    throw ConfigError(path.string() + ": [system] needs mu_amu or mu");
  }
  if (!(mu > 0.0)) throw ConfigError(path.string() + ": reduced mass must be positive");
  return ElectronicSystem(mu, detail::curve_from_section(f, "X"), detail::curve_from_section(f, "A"),
                          detail::dipole_from_section(f));
}

}  // namespace pingpong::io
