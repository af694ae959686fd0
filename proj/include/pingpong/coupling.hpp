#pragma once

// Rovibronic dipole matrix elements, angular factors, coupling maps and
// radiative lifetimes.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pingpong/dvr.hpp"
#include "pingpong/errors.hpp"
#include "pingpong/potentials.hpp"
#include "pingpong/units.hpp"

namespace pingpong {

/// a_J = <Y_J^0|cos(theta)|Y_{J+1}^0> = sqrt((J+1)^2 / ((2J+3)(2J+1)))
inline double angular_factor_a(int J) {
  if (J < 0) throw DomainError("angular_factor_a: J must be non-negative");
  const double j = J;
  return std::sqrt((j + 1.0) * (j + 1.0) / ((2.0 * j + 3.0) * (2.0 * j + 1.0)));
}

/// b_J = <Y_J^0|cos(theta)|Y_{J-1}^0> = sqrt(J^2 / ((2J+1)(2J-1))); zero for J = 0.
inline double angular_factor_b(int J) {
  if (J < 0) throw DomainError("angular_factor_b: J must be non-negative");
  if (J == 0) return 0.0;
  const double j = J;
  return std::sqrt(j * j / ((2.0 * j + 1.0) * (2.0 * j - 1.0)));
}

/// Angular factor of a J <-> J' = J +- 1 link, a_{min(J, J')}.
inline double link_angular_factor(int J1, int J2) {
  if (std::abs(J1 - J2) != 1) throw DomainError("E1 link requires |J - J'| = 1");
  return angular_factor_a(std::min(J1, J2));
}

/// d(R) sampled on a grid.
inline Eigen::VectorXd sample_dipole(const DipoleFunction& d, const RadialGrid& grid) {
  Eigen::VectorXd out(grid.size());
  for (int i = 0; i < grid.size(); ++i) out[i] = d(grid[i]);
  return out;
}

/// <phi_1|d|phi_2> = dR * sum_i phi_1(R_i) d(R_i) phi_2(R_i)
inline double dme(const VibrationalLevel& l1, const VibrationalLevel& l2, const DipoleFunction& d) {
  if (!(l1.grid == l2.grid)) throw DomainError("dme: levels live on different grids");
  const auto& g = l1.grid;
  double sum = 0.0;
  for (int i = 0; i < g.size(); ++i) sum += l1.wavefunction[i] * d(g[i]) * l2.wavefunction[i];
  return g.spacing() * sum;
}

/// Squared DMEs between every pair of levels of two manifolds.
struct CouplingMap {
  Electronic e1;
  int J1;
  Electronic e2;
  int J2;
  Eigen::MatrixXd dme;  // signed, rows index v of manifold 1, columns v' of manifold 2

  Eigen::MatrixXd squared() const { return dme.cwiseAbs2(); }

  /// (v, v') of the largest |dme|.
  std::pair<int, int> strongest() const {
    Eigen::Index r = 0, c = 0;
    dme.cwiseAbs().maxCoeff(&r, &c);
    return {static_cast<int>(r), static_cast<int>(c)};
  }
};

inline CouplingMap coupling_map(const Manifold& m1, const Manifold& m2, const DipoleFunction& d) {
  if (!(m1.grid == m2.grid)) throw DomainError("coupling_map: manifolds solved on different grids");
  const int n = m1.grid.size();
  const auto nv1 = static_cast<Eigen::Index>(m1.levels.size());
  const auto nv2 = static_cast<Eigen::Index>(m2.levels.size());
  Eigen::MatrixXd phi1(n, nv1), phi2(n, nv2);
  for (Eigen::Index v = 0; v < nv1; ++v) phi1.col(v) = m1.levels[v].wavefunction;
  for (Eigen::Index v = 0; v < nv2; ++v) phi2.col(v) = m2.levels[v].wavefunction;
  const Eigen::VectorXd dv = sample_dipole(d, m1.grid);
  CouplingMap map{m1.e, m1.J, m2.e, m2.J, {}};
  map.dme = m1.grid.spacing() * (phi1.transpose() * dv.asDiagonal() * phi2);
  return map;
}

/// Level energies and DMEs of every manifold pair linked by an E1
/// transition; the input of chain design.
class CouplingMaps {
 public:
  using Key = std::pair<Electronic, int>;

  CouplingMaps() = default;

  CouplingMaps(const std::vector<Manifold>& manifolds, const DipoleFunction& d) {
    for (const auto& m : manifolds) {
      std::vector<double> e;
      for (const auto& l : m.levels) e.push_back(l.energy);
      add_manifold(m.e, m.J, std::move(e));
    }
    for (const auto& m1 : manifolds) {
      for (const auto& m2 : manifolds) {
        if (m1.e != m2.e && m2.J == m1.J + 1) add_map(coupling_map(m1, m2, d));
      }
    }
  }

  /// Manifold energies indexed by v.
  void add_manifold(Electronic e, int J, std::vector<double> energies) {
    energies_[{e, J}] = std::move(energies);
  }

  /// Stores `map` and its transpose.
  void add_map(CouplingMap map) {
    CouplingMap t{map.e2, map.J2, map.e1, map.J1, map.dme.transpose()};
    maps_[{{map.e1, map.J1}, {map.e2, map.J2}}] = std::move(map);
    maps_[{{t.e1, t.J1}, {t.e2, t.J2}}] = std::move(t);
  }

  bool has_manifold(Electronic e, int J) const { return energies_.contains({e, J}); }

  const std::vector<double>& energies(Electronic e, int J) const {
    auto it = energies_.find({e, J});
    if (it == energies_.end()) {
      throw DomainError("no levels for manifold " + std::string(to_string(e)) + " J=" +
                        std::to_string(J));
    }
    return it->second;
  }

  int level_count(Electronic e, int J) const {
    return has_manifold(e, J) ? static_cast<int>(energies(e, J).size()) : 0;
  }

  double energy(const StateLabel& s) const {
    const auto& e = energies(s.e, s.J);
    if (s.v < 0 || s.v >= static_cast<int>(e.size())) {
      throw DomainError("level " + to_string(s) + " not available");
    }
    return e[s.v];
  }

  const CouplingMap* map(Electronic e1, int J1, Electronic e2, int J2) const {
    auto it = maps_.find({{e1, J1}, {e2, J2}});
    return it == maps_.end() ? nullptr : &it->second;
  }

  double dme(const StateLabel& a, const StateLabel& b) const {
    const auto* m = map(a.e, a.J, b.e, b.J);
    if (!m) throw DomainError("no coupling map between " + to_string(a) + " and " + to_string(b));
    if (a.v >= m->dme.rows() || b.v >= m->dme.cols()) {
      throw DomainError("DME between " + to_string(a) + " and " + to_string(b) + " not available");
    }
    return m->dme(a.v, b.v);
  }

  std::vector<Key> manifolds() const {
    std::vector<Key> k;
    for (const auto& [key, _] : energies_) k.push_back(key);
    return k;
  }

 private:
  std::map<Key, std::vector<double>> energies_;
  std::map<std::pair<Key, Key>, CouplingMap> maps_;
};

/// Spontaneous emission rate A = 4 w^3 d^2 / (3 c^3) in atomic units.
inline double einstein_a(double omega, double d) {
  if (!(omega > 0.0)) throw DomainError("einstein_a: transition frequency must be positive");
  const double c = units::kSpeedOfLight;
  return 4.0 * omega * omega * omega * d * d / (3.0 * c * c * c);
}

struct DecayChannel {
  double omega;        // hartree, upper minus lower energy
  double dme;          // a.u.
  double weight = 1.0; // rotational branching fraction
};

struct Lifetime {
  double tau = std::numeric_limits<double>::infinity();  // atomic time units
  bool infinite = true;
};

/// tau = (sum_k weight_k A_k)^-1
inline Lifetime radiative_lifetime(std::span<const DecayChannel> channels) {
  double rate = 0.0;
  for (const auto& c : channels) rate += c.weight * einstein_a(c.omega, c.dme);
  if (channels.empty() || rate == 0.0) return {};
  return {1.0 / rate, false};
}

/// Which levels count as lower states in `level_lifetime`.
struct LifetimeOptions {
  /// Weight the J -> J+1 and J -> J-1 branches by their Hoenl-London
  /// fractions (J+1)/(2J+1) and J/(2J+1). Off: each branch carries the full d^2.
  bool rotational_branching = true;
};

/// Radiative lifetime of `upper` from its decay into every lower-lying level
/// of the opposite electronic state with J' = J +- 1 found in `manifolds`.
inline Lifetime level_lifetime(const VibrationalLevel& upper, std::span<const Manifold> manifolds,
                               const DipoleFunction& d, LifetimeOptions opt = {}) {
  std::vector<DecayChannel> channels;
  const int J = upper.label.J;
  for (const auto& m : manifolds) {
    if (m.e == upper.label.e || std::abs(m.J - J) != 1) continue;
    double w = 1.0;
    if (opt.rotational_branching) {
      w = m.J == J + 1 ? (J + 1.0) / (2.0 * J + 1.0) : J / (2.0 * J + 1.0);
    }
    for (const auto& lower : m.levels) {
      const double omega = upper.energy - lower.energy;
      if (omega <= 0.0) continue;
      channels.push_back({omega, pingpong::dme(upper, lower, d), w});
    }
  }
  return radiative_lifetime(channels);
}

}  // namespace pingpong
