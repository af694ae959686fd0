#pragma once

// Coupled-coefficient equations of the chain in the rotating-wave
// approximation, dc/dt = i W(t) c, integrated with a fourth-order Magnus
// scheme whose per-step exponential is computed exactly, so the propagator
// is unitary to round-off.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "pingpong/chain.hpp"
#include "pingpong/errors.hpp"
#include "pingpong/trace.hpp"

namespace pingpong {

/// Resonant RWA matrix: zero diagonal, W_{k,k+1} = W_{k+1,k} = Omega^k(t).
inline Eigen::MatrixXd rwa_hamiltonian(const ChainSpec& chain, const PulseTrain& train, double t) {
  const int n = chain.size();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < chain.links(); ++k) {
    const double om = rabi_profile(chain, train, k, t);
    w(k, k + 1) = om;
    w(k + 1, k) = om;
  }
  return w;
}

/// Every pulse acting on every link, each with its own detuning phase
/// (co-rotating terms only):
///   W_{nm} = sum_j a |d| eps_j(t) / 2 * exp(i (w_nm - sgn(w_nm) w_j) t),  w_nm = E_n - E_m.
inline Eigen::MatrixXcd rwa_hamiltonian_crosstalk(const ChainSpec& chain, const PulseTrain& train,
                                                  double t) {
  const int n = chain.size();
  Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 0; k < chain.links(); ++k) {
    const double coupling = chain.angular[k] * std::abs(chain.dmes[k]) / 2.0;
    const double w_nm = chain.energies[k] - chain.energies[k + 1];
    const double sgn = w_nm >= 0.0 ? 1.0 : -1.0;
    std::complex<double> sum = 0.0;
    for (const auto& p : train.pulses) {
      sum += coupling * envelope(p, t) * std::polar(1.0, (w_nm - sgn * p.omega) * t);
    }
    w(k, k + 1) = sum;
    w(k + 1, k) = std::conj(sum);
  }
  return w;
}

struct RwaOptions {
  std::optional<double> dt;  // default: 0.01 / (fastest rate in W)
  int samples = 401;         // uniformly spaced output times over the train window
  bool crosstalk = false;
  double norm_tolerance = 1e-8;
};

namespace detail {

inline Eigen::MatrixXcd rwa_matrix(const ChainSpec& chain, const PulseTrain& train, double t,
                                   bool crosstalk) {
  if (crosstalk) return rwa_hamiltonian_crosstalk(chain, train, t);
  return rwa_hamiltonian(chain, train, t).cast<std::complex<double>>();
}

// Largest rate the step has to resolve: peak Rabi frequency, plus the
// largest off-resonant detuning in crosstalk mode.
inline double rwa_fastest_rate(const ChainSpec& chain, const PulseTrain& train, bool crosstalk) {
  double rate = 0.0;
  for (int k = 0; k < chain.links(); ++k) {
    rate = std::max(rate, train.pulses[k].eps0 * chain.angular[k] * std::abs(chain.dmes[k]) / 2.0);
  }
  if (crosstalk) {
    for (int k = 0; k < chain.links(); ++k) {
      for (const auto& p : train.pulses) rate = std::max(rate, std::abs(chain.carrier(k) - p.omega));
    }
  }
  return rate;
}

}  // namespace detail

/// Propagates `c` from `t_from` to `t_to` in `steps` equal Magnus-4 steps
/// (negative durations integrate backwards).
inline Eigen::VectorXcd propagate_rwa(const ChainSpec& chain, const PulseTrain& train,
                                      Eigen::VectorXcd c, double t_from, double t_to, int steps,
                                      bool crosstalk = false) {
  if (steps <= 0) return c;
  const double h = (t_to - t_from) / steps;
  const double g = std::sqrt(3.0) / 6.0;
  const std::complex<double> i1(0.0, 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es;
  for (int s = 0; s < steps; ++s) {
    const double t = t_from + s * h;
    const Eigen::MatrixXcd w1 = detail::rwa_matrix(chain, train, t + (0.5 - g) * h, crosstalk);
    const Eigen::MatrixXcd w2 = detail::rwa_matrix(chain, train, t + (0.5 + g) * h, crosstalk);
    // exp(i K) with K = h/2 (W1 + W2) + i sqrt(3)/12 h^2 [W2, W1], Hermitian.
    Eigen::MatrixXcd k = 0.5 * h * (w1 + w2);
    k += i1 * (std::sqrt(3.0) / 12.0) * h * h * (w2 * w1 - w1 * w2);
    es.compute(k);
    const Eigen::VectorXcd phase = (i1 * es.eigenvalues().cast<std::complex<double>>()).array().exp();
    c = es.eigenvectors() * (phase.asDiagonal() * (es.eigenvectors().adjoint() * c));
  }
  return c;
}

/// Populations of the chain states starting from the first chain state.
inline PopulationTrace integrate_rwa(const ChainSpec& chain, const PulseTrain& train,
                                     const RwaOptions& opt = {}) {
  if (static_cast<int>(train.pulses.size()) != chain.links()) {
    throw DomainError("integrate_rwa: pulse train does not match the chain");
  }
  const double rate = detail::rwa_fastest_rate(chain, train, opt.crosstalk);
  double dt = opt.dt.value_or(rate > 0.0 ? 0.01 / rate : (train.t_end - train.t_start));
  if (!(dt > 0.0)) throw ConfigError("integrate_rwa: time step must be positive");
  if (dt * rate >= 0.05) {
    throw ConfigError("integrate_rwa: dt * Omega_max = " + std::to_string(dt * rate) +
                      " does not resolve the dynamics (must be < 0.05)");
  }
  const auto times = sample_times(train, opt.samples);
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(chain.size());
  c[0] = 1.0;
  PopulationTrace tr;
  tr.states = chain.states;
  tr.append(times[0], c.cwiseAbs2(), 0.0);
  for (std::size_t i = 1; i < times.size(); ++i) {
    const int steps = std::max(1, static_cast<int>(std::ceil((times[i] - times[i - 1]) / dt)));
    c = propagate_rwa(chain, train, std::move(c), times[i - 1], times[i], steps, opt.crosstalk);
    const double norm = c.squaredNorm();
    if (!std::isfinite(norm) || std::abs(norm - 1.0) > opt.norm_tolerance) {
      throw NumericalError("integrate_rwa: norm drift " + std::to_string(norm - 1.0) + " at t = " +
                           std::to_string(times[i]));
    }
    tr.append(times[i], c.cwiseAbs2(), 1.0 - c.squaredNorm());
  }
  return tr;
}

}  // namespace pingpong
