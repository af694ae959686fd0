#pragma once

// Linkage chains, their resonant pulse trains and the Rabi profiles those
// trains produce.
//
// Link k (0-based) joins states k and k+1 and is driven by pulse k, whose
// peak Rabi frequency is Omega0_peak * sqrt((k+1)(N-k-1)). All pulses share
// the Gaussian-4 profile exp(-(t - t0)^4 / sigma^4) unless staggered.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pingpong/coupling.hpp"
#include "pingpong/dvr.hpp"
#include "pingpong/errors.hpp"
#include "pingpong/units.hpp"

namespace pingpong {

struct ChainSpec {
  std::vector<StateLabel> states;
  std::vector<double> energies;  // hartree, one per state
  std::vector<double> dmes;      // signed, one per link
  std::vector<double> angular;   // a_{min(J,J')}, one per link

  int size() const { return static_cast<int>(states.size()); }
  int links() const { return size() - 1; }

  /// Resonant carrier of link k, |E_{k+1} - E_k|.
  double carrier(int k) const { return std::abs(energies.at(k + 1) - energies.at(k)); }

  /// Structural invariants: N >= 2, alternating electronic state, |dJ| = 1,
  /// every |d_k| above `threshold`, no repeated state.
  void validate(double threshold = 1e-4) const {
    const int n = size();
    if (n < 2) throw DomainError("chain needs at least two states");
    if (static_cast<int>(energies.size()) != n || static_cast<int>(dmes.size()) != n - 1 ||
        static_cast<int>(angular.size()) != n - 1) {
      throw DomainError("chain arrays have inconsistent lengths");
    }
    std::set<StateLabel> seen(states.begin(), states.end());
    if (static_cast<int>(seen.size()) != n) throw DomainError("chain visits a state twice");
    for (int k = 0; k + 1 < n; ++k) {
      const auto& a = states[k];
      const auto& b = states[k + 1];
      if (a.e == b.e) throw DomainError("chain link " + std::to_string(k) + " does not change electronic state");
      if (std::abs(a.J - b.J) != 1) throw DomainError("chain link " + std::to_string(k) + " violates |dJ| = 1");
      if (!(std::abs(dmes[k]) > threshold)) {
        throw InfeasibleError("chain link " + to_string(a) + " -> " + to_string(b) + " has |d| = " +
                              std::to_string(std::abs(dmes[k])) + " below threshold " +
                              std::to_string(threshold));
      }
    }
  }
};

/// sqrt(k (N - k)) for the 1-based link index k.
inline double su_n_weight(int link, int n_states) {
  const int k = link + 1;
  return std::sqrt(static_cast<double>(k) * (n_states - k));
}

/// Builds a chain from explicitly listed states, looking up energies and DMEs.
inline ChainSpec chain_from_states(const CouplingMaps& maps, const std::vector<StateLabel>& states,
                                   double threshold = 1e-4) {
  ChainSpec c;
  c.states = states;
  for (const auto& s : states) c.energies.push_back(maps.energy(s));
  for (std::size_t k = 0; k + 1 < states.size(); ++k) {
    if (std::abs(states[k].J - states[k + 1].J) != 1 || states[k].e == states[k + 1].e) {
      throw DomainError("states " + to_string(states[k]) + " and " + to_string(states[k + 1]) +
                        " are not E1-linked");
    }
    c.dmes.push_back(maps.dme(states[k], states[k + 1]));
    c.angular.push_back(link_angular_factor(states[k].J, states[k + 1].J));
  }
  c.validate(threshold);
  return c;
}

/// Smallest |omega_unwanted - omega_k| over every pulse k and every E1
/// transition out of a chain state other than the link pulse k is meant to
/// drive. Only manifolds present in `maps` are scanned.
inline double spectral_isolation(const ChainSpec& chain, const CouplingMaps& maps) {
  double iso = std::numeric_limits<double>::infinity();
  const int n = chain.size();
  for (int i = 0; i < n; ++i) {
    const auto& s = chain.states[i];
    for (int dj : {-1, 1}) {
      const Electronic e = partner(s.e);
      const int J = s.J + dj;
      if (J < 0 || !maps.has_manifold(e, J)) continue;
      const auto& en = maps.energies(e, J);
      for (int v = 0; v < static_cast<int>(en.size()); ++v) {
        const StateLabel u{e, v, J};
        const double f = std::abs(en[v] - chain.energies[i]);
        for (int k = 0; k + 1 < n; ++k) {
          const bool intended = (k == i - 1 && chain.states[i - 1] == u) ||
                                (k == i && i + 1 < n && chain.states[i + 1] == u);
          if (intended) continue;
          iso = std::min(iso, std::abs(f - chain.carrier(k)));
        }
      }
    }
  }
  return iso;
}

struct ChainSearchOptions {
  double threshold = 1e-4;    // minimum acceptable |d_k|
  int max_candidates = 0;     // neighbours explored per link, strongest first; 0 = all
  double min_detuning = 0.0;  // reject chains whose spectral_isolation is below this; 0 = off
};

namespace detail {

struct ChainKey {
  double bottleneck;
  double sum_sq;
  double energy;  // total energy of intermediates; lower wins

  bool better_than(const ChainKey& o) const {
    if (bottleneck != o.bottleneck) return bottleneck > o.bottleneck;
    if (sum_sq != o.sum_sq) return sum_sq > o.sum_sq;
    return energy < o.energy;
  }
};

}  // namespace detail

/// Chain from `initial` to `target` with N states that maximises the
/// smallest |d_k|; ties go to the larger sum of d_k^2, then to the lower total
/// energy of the intermediates. The search is exhaustive over the levels in
/// `maps` (optionally capped by `max_candidates`), pruned by a precomputed
/// bound on the best bottleneck reachable from each level.
inline ChainSpec design_chain(const CouplingMaps& maps, const StateLabel& initial,
                              const StateLabel& target, int n_states,
                              const ChainSearchOptions& opt = {}) {
  if (n_states < 2) throw DomainError("design_chain: N must be at least 2");
  const int links = n_states - 1;
  const Electronic e_end = links % 2 == 0 ? initial.e : partner(initial.e);
  if (e_end != target.e) {
    throw DomainError("design_chain: N=" + std::to_string(n_states) +
                      " cannot connect the electronic states of the endpoints");
  }
  const int dj = std::abs(target.J - initial.J);
  if (dj > links || (links - dj) % 2 != 0) {
    throw DomainError("design_chain: N=" + std::to_string(n_states) +
                      " is inconsistent with the J walk between the endpoints");
  }
  maps.energy(initial);
  maps.energy(target);

  // Levels allowed at each position.
  std::vector<std::vector<StateLabel>> layer(n_states);
  for (int i = 0; i < n_states; ++i) {
    const Electronic e = i % 2 == 0 ? initial.e : partner(initial.e);
    if (i == 0) {
      layer[i] = {initial};
      continue;
    }
    if (i == links) {
      layer[i] = {target};
      continue;
    }
    for (int J = std::max(0, initial.J - i); J <= initial.J + i; ++J) {
      if ((J - initial.J - i) % 2 != 0) continue;
      if (std::abs(J - target.J) > links - i) continue;
      for (int v = 0; v < maps.level_count(e, J); ++v) layer[i].push_back({e, v, J});
    }
  }

  auto link_dme = [&](const StateLabel& a, const StateLabel& b) -> std::optional<double> {
    if (std::abs(a.J - b.J) != 1) return std::nullopt;
    const auto* m = maps.map(a.e, a.J, b.e, b.J);
    if (!m || a.v >= m->dme.rows() || b.v >= m->dme.cols()) return std::nullopt;
    return m->dme(a.v, b.v);
  };

  // bound[i][j]: best bottleneck from layer[i][j] to the target.
  std::vector<std::vector<double>> bound(n_states);
  bound[links] = {std::numeric_limits<double>::infinity()};
  for (int i = links - 1; i >= 0; --i) {
    bound[i].assign(layer[i].size(), -1.0);
    for (std::size_t a = 0; a < layer[i].size(); ++a) {
      for (std::size_t b = 0; b < layer[i + 1].size(); ++b) {
        if (bound[i + 1][b] < 0.0) continue;
        if (auto d = link_dme(layer[i][a], layer[i + 1][b])) {
          bound[i][a] = std::max(bound[i][a], std::min(std::abs(*d), bound[i + 1][b]));
        }
      }
    }
  }
  if (bound[0][0] < 0.0) throw InfeasibleError("design_chain: endpoints are not connected");

  std::optional<detail::ChainKey> best_key;
  std::vector<StateLabel> best_path;
  std::vector<StateLabel> path{initial};
  std::vector<double> dpath;

  auto evaluate = [&] {
    ChainSpec c;
    c.states = path;
    for (const auto& s : path) c.energies.push_back(maps.energy(s));
    c.dmes = dpath;
    for (int k = 0; k < links; ++k) c.angular.push_back(link_angular_factor(path[k].J, path[k + 1].J));
    std::set<StateLabel> uniq(path.begin(), path.end());
    if (static_cast<int>(uniq.size()) != n_states) return;
    if (opt.min_detuning > 0.0 && spectral_isolation(c, maps) < opt.min_detuning) return;
    detail::ChainKey key{std::numeric_limits<double>::infinity(), 0.0, 0.0};
    for (double d : dpath) {
      key.bottleneck = std::min(key.bottleneck, std::abs(d));
      key.sum_sq += d * d;
    }
    for (int i = 1; i < links; ++i) key.energy += c.energies[i];
    if (!best_key || key.better_than(*best_key)) {
      best_key = key;
      best_path = path;
    }
  };

  auto dfs = [&](auto&& self, int i, std::size_t idx, double bottleneck) -> void {
    if (i == links) {
      evaluate();
      return;
    }
    struct Cand {
      std::size_t idx;
      double d;
    };
    std::vector<Cand> cands;
    for (std::size_t b = 0; b < layer[i + 1].size(); ++b) {
      if (bound[i + 1][b] < 0.0) continue;
      if (auto d = link_dme(layer[i][idx], layer[i + 1][b])) cands.push_back({b, *d});
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Cand& x, const Cand& y) { return std::abs(x.d) > std::abs(y.d); });
    if (opt.max_candidates > 0 && static_cast<int>(cands.size()) > opt.max_candidates) {
      cands.resize(opt.max_candidates);
    }
    for (const auto& c : cands) {
      const double bn = std::min(bottleneck, std::abs(c.d));
      if (best_key && std::min(bn, bound[i + 1][c.idx]) < best_key->bottleneck) continue;
      path.push_back(layer[i + 1][c.idx]);
      dpath.push_back(c.d);
      self(self, i + 1, c.idx, bn);
      path.pop_back();
      dpath.pop_back();
    }
  };
  dfs(dfs, 0, 0, std::numeric_limits<double>::infinity());

  if (!best_key) {
    throw InfeasibleError("design_chain: no chain of " + std::to_string(n_states) +
                          " distinct states satisfies the search constraints");
  }
  ChainSpec best;
  best.states = best_path;
  for (const auto& s : best_path) best.energies.push_back(maps.energy(s));
  for (int k = 0; k < links; ++k) {
    best.dmes.push_back(maps.dme(best_path[k], best_path[k + 1]));
    best.angular.push_back(link_angular_factor(best_path[k].J, best_path[k + 1].J));
  }
  if (best_key->bottleneck < opt.threshold) {
    int weakest = 0;
    for (int k = 1; k < links; ++k) {
      if (std::abs(best.dmes[k]) < std::abs(best.dmes[weakest])) weakest = k;
    }
    std::ostringstream msg;
    msg << "design_chain: infeasible, best chain's weakest link " << to_string(best.states[weakest])
        << " -> " << to_string(best.states[weakest + 1]) << " has |d| = " << std::abs(best.dmes[weakest])
        << " < threshold " << opt.threshold;
    throw InfeasibleError(msg.str());
  }
  return best;
}

// ---------------------------------------------------------------------------
// Pulses

enum class EnvelopeShape {
  kGaussian4,  // exp(-(t - t0)^4 / sigma^4)
  kConstant,   // continuous wave, used for Rabi-flopping checks
};

struct PulseSpec {
  double eps0;   // field amplitude, a.u.
  double omega;  // carrier, hartree
  double t0;     // centre, a.u. of time
  double sigma;  // width, a.u. of time
  EnvelopeShape shape = EnvelopeShape::kGaussian4;
};

/// eps(t) = eps0 exp(-(t - t0)^4 / sigma^4)
inline double envelope(const PulseSpec& p, double t) {
  if (p.shape == EnvelopeShape::kConstant) return p.eps0;
  const double x = (t - p.t0) / p.sigma;
  const double x2 = x * x;
  return p.eps0 * std::exp(-x2 * x2);
}

struct PulseTrain {
  std::vector<PulseSpec> pulses;  // pulse k drives chain link k
  double t_start = 0.0;
  double t_end = 0.0;
};

/// E(t) = sum_k eps_k(t) cos(omega_k t)
inline double total_field(const PulseTrain& train, double t) {
  double e = 0.0;
  for (const auto& p : train.pulses) e += envelope(p, t) * std::cos(p.omega * t);
  return e;
}

/// Integral of exp(-x^4) over the real line, 2 Gamma(5/4).
inline double gaussian4_integral() { return 2.0 * std::tgamma(1.25); }

/// Peak of the common profile Omega_0(t) whose full-line integral is `area`.
inline double omega0_for_area(double area, double sigma) {
  if (!(sigma > 0.0)) throw DomainError("pulse width must be positive");
  return area / (sigma * gaussian4_integral());
}

/// eps0_k = 2 Omega0_peak sqrt(k(N-k)) / (a_k |d_k|)
inline std::vector<double> field_strengths(const ChainSpec& chain, double omega0_peak) {
  std::vector<double> eps;
  const int n = chain.size();
  for (int k = 0; k < chain.links(); ++k) {
    const double coupling = chain.angular.at(k) * std::abs(chain.dmes.at(k));
    if (coupling == 0.0) {
      throw InfeasibleError("field_strengths: link " + to_string(chain.states[k]) + " -> " +
                            to_string(chain.states[k + 1]) + " has zero dipole coupling");
    }
    eps.push_back(2.0 * omega0_peak * su_n_weight(k, n) / coupling);
  }
  return eps;
}

/// Peak intensity (W/cm^2) of a field of amplitude eps0 (a.u.).
inline double intensity_from_amplitude(double eps0) { return units::kAuIntensityWcm2 * eps0 * eps0; }
inline double amplitude_from_intensity(double wcm2) {
  if (wcm2 < 0.0) throw DomainError("intensity must be non-negative");
  return std::sqrt(wcm2 / units::kAuIntensityWcm2);
}

/// Omega0_peak for which the strongest pulse of the train reaches `wcm2`.
inline double omega0_for_peak_intensity(const ChainSpec& chain, double wcm2) {
  double worst = 0.0;  // largest eps0 per unit Omega0
  for (int k = 0; k < chain.links(); ++k) {
    const double coupling = chain.angular.at(k) * std::abs(chain.dmes.at(k));
    if (coupling == 0.0) throw InfeasibleError("omega0_for_peak_intensity: zero dipole coupling");
    worst = std::max(worst, 2.0 * su_n_weight(k, chain.size()) / coupling);
  }
  if (worst == 0.0) throw DomainError("omega0_for_peak_intensity: chain has no links");
  return amplitude_from_intensity(wcm2) / worst;
}

struct PulseDesign {
  double sigma = units::nanoseconds(0.387);
  std::optional<double> t0;           // default 2.5 sigma
  double area = std::numbers::pi / 2; // integral of Omega_0(t)
  std::optional<double> omega0_peak;  // overrides `area`
  double stagger = 0.0;               // pulse k centred at t0 + k * stagger
  std::optional<double> t_start;      // default t0 - 2.5 sigma
  std::optional<double> t_end;        // default t0 + 2.5 sigma + (N-2) stagger
};

inline double design_omega0(const PulseDesign& d) {
  return d.omega0_peak ? *d.omega0_peak : omega0_for_area(d.area, d.sigma);
}

/// Resonant pulse train realising the sqrt(k(N-k)) Rabi pattern.
inline PulseTrain build_pulse_train(const ChainSpec& chain, const PulseDesign& design) {
  if (!(design.sigma > 0.0)) throw DomainError("pulse width must be positive");
  const double t0 = design.t0.value_or(2.5 * design.sigma);
  const auto eps = field_strengths(chain, design_omega0(design));
  PulseTrain train;
  for (int k = 0; k < chain.links(); ++k) {
    train.pulses.push_back({eps[k], chain.carrier(k), t0 + k * design.stagger, design.sigma});
  }
  train.t_start = design.t_start.value_or(t0 - 2.5 * design.sigma);
  train.t_end = design.t_end.value_or(t0 + 2.5 * design.sigma +
                                      std::max(0, chain.links() - 1) * design.stagger);
  return train;
}

/// Omega^k(t) = eps_k(t) a_k |d_k| / 2
inline double rabi_profile(const ChainSpec& chain, const PulseTrain& train, int link, double t) {
  if (link < 0 || link >= chain.links()) throw DomainError("rabi_profile: link index out of range");
  return envelope(train.pulses.at(link), t) * chain.angular[link] * std::abs(chain.dmes[link]) / 2.0;
}

/// True when every pulse shares t0 and sigma, i.e. the chain is driven by a
/// single common profile.
inline bool has_common_profile(const PulseTrain& train) {
  for (const auto& p : train.pulses) {
    const auto& f = train.pulses.front();
    if (p.shape != f.shape) return false;
    if (p.shape == EnvelopeShape::kGaussian4 && (p.t0 != f.t0 || p.sigma != f.sigma)) return false;
  }
  return !train.pulses.empty();
}

/// Omega_0(t) = Omega^k(t) / sqrt(k(N-k)) (the same for every k on a designed train).
inline double common_profile(const ChainSpec& chain, const PulseTrain& train, double t) {
  return rabi_profile(chain, train, 0, t) / su_n_weight(0, chain.size());
}

/// Uniformly spaced sample times covering the train window.
inline std::vector<double> sample_times(const PulseTrain& train, int samples) {
  if (samples < 2) throw DomainError("need at least two samples");
  std::vector<double> t(samples);
  for (int i = 0; i < samples; ++i) {
    t[i] = train.t_start + (train.t_end - train.t_start) * i / (samples - 1);
  }
  return t;
}

}  // namespace pingpong
