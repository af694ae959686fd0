#pragma once

// Bundled synthetic systems. The same numbers live in data/toy_system.toml.

#include "pingpong/potentials.hpp"
#include "pingpong/units.hpp"

namespace pingpong::systems {

/// Light two-curve Morse molecule (mu = 1 amu) whose levels are sparse
/// enough for picosecond pulses to address single transitions.
///   X: De = 0.06, a = 1.0, Re = 2.5, Te = 0
///   A: De = 0.045, a = 0.8, Re = 3.2, Te = 0.045
///   d(R) = 1 + 0.5 exp(-((R - 3) / 1.5)^2)
inline ElectronicSystem toy() {
  return ElectronicSystem(units::amu(1.0),
                          PotentialCurve::morse("X", {0.06, 1.0, 2.5, 0.0}),
                          PotentialCurve::morse("A", {0.045, 0.8, 3.2, 0.045}),
                          DipoleFunction::gaussian(1.0, 0.5, 3.0, 1.5));
}

/// Morse curve used for eigensolver validation: De = 0.02, a = 0.9, Re = 7, mu = 26.9 amu.
inline MorseParams validation_morse() { return {0.02, 0.9, 7.0, 0.0}; }
inline double validation_mu() { return units::amu(26.9); }

}  // namespace pingpong::systems
