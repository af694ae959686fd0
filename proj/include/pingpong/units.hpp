#pragma once

// Hartree atomic units are used for every internal quantity. The constants
// below convert the user-facing units accepted by the file readers and the
// command-line tools.

#include <numbers>

namespace pingpong::units {

inline constexpr double kHartreeToWavenumber = 219474.6313705;  // cm^-1
inline constexpr double kHartreeToEv = 27.211386245988;
inline constexpr double kBohrToAngstrom = 0.529177210903;
inline constexpr double kDebyeToAu = 0.393430238;
inline constexpr double kAmuToElectronMass = 1822.888486209;
inline constexpr double kAuTimeToSeconds = 2.4188843265857e-17;
inline constexpr double kSpeedOfLight = 137.035999084;  // a.u.

/// Peak intensity of a linearly polarised field of unit amplitude,
/// I = (1/2) eps0 c E^2, expressed in W/cm^2.
inline constexpr double kAuIntensityWcm2 = 3.50944506e16;

inline constexpr double picoseconds(double ps) { return ps * 1e-12 / kAuTimeToSeconds; }
inline constexpr double nanoseconds(double ns) { return ns * 1e-9 / kAuTimeToSeconds; }
inline constexpr double to_picoseconds(double t_au) { return t_au * kAuTimeToSeconds * 1e12; }
inline constexpr double to_nanoseconds(double t_au) { return t_au * kAuTimeToSeconds * 1e9; }

inline constexpr double wavenumbers(double cm) { return cm / kHartreeToWavenumber; }
inline constexpr double to_wavenumbers(double hartree) { return hartree * kHartreeToWavenumber; }

inline constexpr double angstrom(double a) { return a / kBohrToAngstrom; }
inline constexpr double amu(double m) { return m * kAmuToElectronMass; }

}  // namespace pingpong::units
