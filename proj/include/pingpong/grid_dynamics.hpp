#pragma once

// Coupled radial channels F^e_J(R, t) propagated on a uniform grid with the
// symmetric split-operator scheme
//   exp(-i V(t+dt/2) dt/2) exp(-i T dt) exp(-i V(t+dt/2) dt/2),
// where V holds the effective potentials on the diagonal and the dipole
// coupling -d(R) E(t) a_{min(J,J')} between (e, J) and (e', J +- 1).
// No rotating-wave approximation is made.

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pingpong/chain.hpp"
#include "pingpong/coupling.hpp"
#include "pingpong/dvr.hpp"
#include "pingpong/errors.hpp"
#include "pingpong/potentials.hpp"
#include "pingpong/trace.hpp"

namespace pingpong {

struct Channel {
  Electronic e;
  int J;

  friend bool operator==(const Channel&, const Channel&) = default;
  friend auto operator<=>(const Channel& a, const Channel& b) {
    if (auto c = static_cast<int>(a.e) <=> static_cast<int>(b.e); c != 0) return c;
    return a.J <=> b.J;
  }
};

inline std::string to_string(const Channel& c) {
  return std::string(to_string(c.e)) + ":" + std::to_string(c.J);
}

/// Parity block of a channel. E1 coupling never leaves a block: X channels
/// with even J only talk to A channels with odd J, and vice versa.
inline int parity_block(const Channel& c) { return (c.J + (c.e == Electronic::A ? 1 : 0)) % 2; }

/// Channels spanned by a chain: every J between the smallest and largest J of
/// the chain (widened by `extra_j` on each side), with the electronic state
/// fixed by the chain's parity block. `opposite_block` adds the channels of
/// the other block over the same J range.
inline std::vector<Channel> chain_channels(const ChainSpec& chain, int extra_j = 0,
                                           bool opposite_block = false) {
  if (chain.size() < 1) throw DomainError("chain_channels: empty chain");
  int jmin = chain.states.front().J, jmax = jmin;
  for (const auto& s : chain.states) {
    jmin = std::min(jmin, s.J);
    jmax = std::max(jmax, s.J);
  }
  jmin = std::max(0, jmin - std::max(0, extra_j));
  jmax += std::max(0, extra_j);
  const int block = parity_block({chain.states.front().e, chain.states.front().J});
  std::vector<Channel> out;
  for (int J = jmin; J <= jmax; ++J) {
    for (Electronic e : {Electronic::X, Electronic::A}) {
      const Channel c{e, J};
      if (parity_block(c) == block || opposite_block) out.push_back(c);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct AbsorberConfig {
  double fraction = 0.1;   // outer part of the grid covered by the mask
  double strength = 0.01;  // mask exp(-strength dt x^2), x in [0, 1] across the layer
};

struct PropagationConfig {
  RadialGrid grid = RadialGrid::propagation_default();
  std::optional<double> dt;       // default 0.1 / omega_max
  std::optional<double> t_start;  // default: the train window
  std::optional<double> t_end;
  std::vector<Channel> channels;  // default: chain_channels(chain, extra_j, include_opposite_block)
  int extra_j = 0;
  bool include_opposite_block = false;
  AbsorberConfig absorber;
  int samples = 401;
  std::vector<StateLabel> watch;  // extra states to project on
  double norm_tolerance = 1e-6;   // on norm + absorbed
};

/// Largest carrier of the train; the step has to resolve it.
inline double max_carrier(const PulseTrain& train) {
  double w = 0.0;
  for (const auto& p : train.pulses) w = std::max(w, p.omega);
  return w;
}

/// Per-grid-point symmetric channel matrices: V^e_J(R_i) on the diagonal,
/// -d(R_i) E a_{min(J,J')} between E1-linked channels. Entry i of the result
/// is the matrix at R_i, rows and columns in the order of `channels`.
inline std::vector<Eigen::MatrixXd> build_coupling(const ElectronicSystem& system,
                                                   const std::vector<Channel>& channels,
                                                   const RadialGrid& grid, double field) {
  const int m = static_cast<int>(channels.size());
  std::vector<Eigen::MatrixXd> out(grid.size(), Eigen::MatrixXd::Zero(m, m));
  for (int i = 0; i < grid.size(); ++i) {
    const double r = grid[i];
    const double d = system.dipole()(r);
    auto& h = out[i];
    for (int a = 0; a < m; ++a) {
      h(a, a) = effective_potential(system.curve(channels[a].e), system.mu(), channels[a].J, r);
      for (int b = 0; b < m; ++b) {
        if (channels[a].e != channels[b].e && std::abs(channels[a].J - channels[b].J) == 1) {
          h(a, b) = -d * field * link_angular_factor(channels[a].J, channels[b].J);
        }
      }
    }
  }
  return out;
}

/// Split-operator propagator for a fixed channel set. The wavefunction is an
/// n_points x n_channels matrix, one column per channel.
class SplitOperator {
 public:
  /// `potentials`: n_points x n_channels effective potentials; `dipole`: d(R_i).
  SplitOperator(const RadialGrid& grid, double mu, std::vector<Channel> channels,
                Eigen::MatrixXd potentials, Eigen::VectorXd dipole, double dt,
                AbsorberConfig absorber = {})
      : grid_(grid), mu_(mu), dt_(dt), channels_(std::move(channels)), v_(std::move(potentials)),
        d_(std::move(dipole)) {
    const int n = grid_.size();
    const int m = static_cast<int>(channels_.size());
    if (m == 0) throw DomainError("split operator needs at least one channel");
    if (v_.rows() != n || v_.cols() != m || d_.size() != n) {
      throw DomainError("split operator: potential/dipole arrays do not match the grid");
    }
    if (!(dt_ > 0.0)) throw ConfigError("time step must be positive");
    if (!(mu_ > 0.0)) throw DomainError("reduced mass must be positive");
    if (!v_.allFinite() || !d_.allFinite()) throw NumericalError("non-finite potential on the propagation grid");
    std::set<Channel> uniq(channels_.begin(), channels_.end());
    if (uniq.size() != channels_.size()) throw DomainError("duplicate channel");

    // Blocks: channels sorted by J within each parity class; consecutive J
    // are E1-linked, so every block matrix is tridiagonal.
    for (int b : {0, 1}) {
      Block blk;
      for (int c = 0; c < m; ++c) {
        if (parity_block(channels_[c]) == b) blk.idx.push_back(c);
      }
      if (blk.idx.empty()) continue;
      std::sort(blk.idx.begin(), blk.idx.end(),
                [&](int x, int y) { return channels_[x].J < channels_[y].J; });
      const int k = static_cast<int>(blk.idx.size());
      blk.angular = Eigen::VectorXd::Zero(std::max(0, k - 1));
      for (int j = 0; j + 1 < k; ++j) {
        const auto& c1 = channels_[blk.idx[j]];
        const auto& c2 = channels_[blk.idx[j + 1]];
        if (c2.J == c1.J + 1) blk.angular[j] = link_angular_factor(c1.J, c2.J);
      }
      blk.vectors.assign(n, Eigen::MatrixXd());
      blk.values = Eigen::MatrixXd(k, n);
      blocks_.push_back(std::move(blk));
    }

    psi_ = Eigen::MatrixXcd::Zero(n, m);

    // Angular wavenumbers of the DFT ordering and the kinetic propagator.
    const double length = n * grid_.spacing();
    kinetic_ = Eigen::VectorXcd(n);
    for (int j = 0; j < n; ++j) {
      const int jj = j <= n / 2 ? j : j - n;
      const double k = 2.0 * std::numbers::pi * jj / length;
      kinetic_[j] = std::polar(1.0 / n, -k * k / (2.0 * mu_) * dt_);
    }

    mask_ = Eigen::VectorXd::Ones(n);
    if (absorber.fraction > 0.0 && absorber.strength > 0.0) {
      const double r0 = grid_.r_max() - absorber.fraction * (grid_.r_max() - grid_.r_min());
      const double width = grid_.r_max() - r0;
      for (int i = 0; i < n; ++i) {
        if (grid_[i] > r0) {
          const double x = (grid_[i] - r0) / width;
          mask_[i] = std::exp(-absorber.strength * dt_ * x * x);
        }
      }
    }

    auto* data = reinterpret_cast<fftw_complex*>(psi_.data());
    int len[] = {n};
    forward_ = fftw_plan_many_dft(1, len, m, data, nullptr, 1, n, data, nullptr, 1, n, FFTW_FORWARD,
                                  FFTW_ESTIMATE);
    backward_ = fftw_plan_many_dft(1, len, m, data, nullptr, 1, n, data, nullptr, 1, n, FFTW_BACKWARD,
                                   FFTW_ESTIMATE);
    if (!forward_ || !backward_) throw NumericalError("FFTW plan creation failed");
  }

  /// Potentials and dipole sampled from `system` on `grid`.
  SplitOperator(const ElectronicSystem& system, const RadialGrid& grid, std::vector<Channel> channels,
                double dt, AbsorberConfig absorber = {})
      : SplitOperator(grid, system.mu(), channels, sample_potentials(system, grid, channels),
                      sample_dipole(system.dipole(), grid), dt, absorber) {}

  SplitOperator(const SplitOperator&) = delete;
  SplitOperator& operator=(const SplitOperator&) = delete;
  ~SplitOperator() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  static Eigen::MatrixXd sample_potentials(const ElectronicSystem& system, const RadialGrid& grid,
                                           const std::vector<Channel>& channels) {
    Eigen::MatrixXd v(grid.size(), static_cast<Eigen::Index>(channels.size()));
    for (std::size_t c = 0; c < channels.size(); ++c) {
      const auto& curve = system.curve(channels[c].e);
      for (int i = 0; i < grid.size(); ++i) {
        v(i, static_cast<Eigen::Index>(c)) = effective_potential(curve, system.mu(), channels[c].J, grid[i]);
      }
    }
    return v;
  }

  const RadialGrid& grid() const { return grid_; }
  const std::vector<Channel>& channels() const { return channels_; }
  double dt() const { return dt_; }
  double absorbed() const { return absorbed_; }

  int channel_index(const Channel& c) const {
    auto it = std::find(channels_.begin(), channels_.end(), c);
    if (it == channels_.end()) throw DomainError("channel " + to_string(c) + " is not propagated");
    return static_cast<int>(it - channels_.begin());
  }

  Eigen::MatrixXcd& wavefunction() { return psi_; }
  const Eigen::MatrixXcd& wavefunction() const { return psi_; }

  /// sum over channels of dR sum_i |F|^2
  double norm() const { return grid_.spacing() * psi_.squaredNorm(); }

  /// <phi|F_c> for a real level on the same grid.
  std::complex<double> overlap(const Eigen::VectorXd& phi, int channel) const {
    return grid_.spacing() * phi.cast<std::complex<double>>().dot(psi_.col(channel));
  }

  /// One step from t to t + dt with the field sampled at the midpoint.
  void step(double field_midpoint) {
    const double h = 0.5 * dt_;
    for (auto& blk : blocks_) half_potential_prepare(blk, field_midpoint);
    for (auto& blk : blocks_) half_potential_apply(blk, h);
    fftw_execute(forward_);
    for (Eigen::Index c = 0; c < psi_.cols(); ++c) psi_.col(c).array() *= kinetic_.array();
    fftw_execute(backward_);
    for (auto& blk : blocks_) half_potential_apply(blk, h);
    if (mask_.minCoeff() < 1.0) {
      const double before = norm();
      psi_.array().colwise() *= mask_.array().cast<std::complex<double>>();
      absorbed_ += before - norm();
    }
  }

 private:
  struct Block {
    std::vector<int> idx;                  // channel indices sorted by J
    Eigen::VectorXd angular;               // a_{min(J,J')} per adjacent pair, 0 if not linked
    bool diagonal = true;                  // current field leaves the block uncoupled
    Eigen::MatrixXd values;                // eigenvalues per point (k x n)
    std::vector<Eigen::MatrixXd> vectors;  // eigenvectors per point
  };

  void half_potential_prepare(Block& blk, double field) {
    const int k = static_cast<int>(blk.idx.size());
    blk.diagonal = k == 1 || field == 0.0 || blk.angular.cwiseAbs().maxCoeff() == 0.0;
    if (blk.diagonal) return;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
    Eigen::VectorXd diag(k), sub(k - 1);
    for (int i = 0; i < grid_.size(); ++i) {
      for (int j = 0; j < k; ++j) diag[j] = v_(i, blk.idx[j]);
      for (int j = 0; j + 1 < k; ++j) sub[j] = -d_[i] * field * blk.angular[j];
      es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      if (es.info() != Eigen::Success) {
        throw NumericalError("channel-coupling eigensolver failed at R = " + std::to_string(grid_[i]));
      }
      blk.values.col(i) = es.eigenvalues();
      blk.vectors[i] = es.eigenvectors();
    }
  }

  void half_potential_apply(Block& blk, double tau) {
    const int k = static_cast<int>(blk.idx.size());
    if (blk.diagonal) {
      for (int j = 0; j < k; ++j) {
        auto col = psi_.col(blk.idx[j]);
        for (int i = 0; i < grid_.size(); ++i) col[i] *= std::polar(1.0, -v_(i, blk.idx[j]) * tau);
      }
      return;
    }
    Eigen::VectorXcd x(k), y(k);
    for (int i = 0; i < grid_.size(); ++i) {
      for (int j = 0; j < k; ++j) x[j] = psi_(i, blk.idx[j]);
      const auto& u = blk.vectors[i];
      y.noalias() = u.transpose() * x;
      for (int j = 0; j < k; ++j) y[j] *= std::polar(1.0, -blk.values(j, i) * tau);
      x.noalias() = u * y;
      for (int j = 0; j < k; ++j) psi_(i, blk.idx[j]) = x[j];
    }
  }

  RadialGrid grid_;
  double mu_;
  double dt_;
  std::vector<Channel> channels_;
  Eigen::MatrixXd v_;
  Eigen::VectorXd d_;
  std::vector<Block> blocks_;
  Eigen::MatrixXcd psi_;
  Eigen::VectorXcd kinetic_;
  Eigen::VectorXd mask_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
  double absorbed_ = 0.0;
};

struct GridResult {
  PopulationTrace trace;  // chain states, then watched states
  std::vector<Channel> channels;
  double dt = 0.0;
  long steps = 0;
  double final_norm = 0.0;
  double absorbed = 0.0;
  double max_budget_error = 0.0;  // max |norm + absorbed - 1|
  double max_leakage = 0.0;
};

/// Propagates the chain-start eigenfunction under the full field of `train`
/// and projects onto the chain (and watched) states at `config.samples`
/// uniformly spaced times.
inline GridResult propagate(const ElectronicSystem& system, const ChainSpec& chain,
                            const PulseTrain& train, const PropagationConfig& config = {}) {
  const double t0 = config.t_start.value_or(train.t_start);
  const double t1 = config.t_end.value_or(train.t_end);
  if (!(t1 > t0)) throw ConfigError("propagation window is empty");
  if (config.samples < 2) throw ConfigError("need at least two samples");
  const double wmax = max_carrier(train);
  const double dt_max = config.dt.value_or(wmax > 0.0 ? 0.1 / wmax : (t1 - t0) / 1000.0);
  if (!(dt_max > 0.0)) throw ConfigError("time step must be positive");
  if (wmax > 0.0 && !(dt_max < 0.2 / wmax)) {
    throw ConfigError("dt = " + std::to_string(dt_max) + " does not resolve the largest carrier (need dt < " +
                      std::to_string(0.2 / wmax) + ")");
  }

  std::vector<Channel> channels = config.channels.empty()
                                      ? chain_channels(chain, config.extra_j, config.include_opposite_block)
                                      : config.channels;
  std::vector<StateLabel> states = chain.states;
  for (const auto& w : config.watch) {
    if (std::find(states.begin(), states.end(), w) == states.end()) states.push_back(w);
  }
  for (const auto& s : states) {
    if (std::find(channels.begin(), channels.end(), Channel{s.e, s.J}) == channels.end()) {
      throw ConfigError("state " + to_string(s) + " lies outside the propagated channels");
    }
  }

  // Projection levels on the propagation grid.
  std::map<Channel, int> need;
  for (const auto& s : states) need[{s.e, s.J}] = std::max(need[{s.e, s.J}], s.v + 1);
  std::map<Channel, Manifold> manifolds;
  for (const auto& [c, count] : need) {
    auto m = solve_manifold(system, c.e, c.J, config.grid, count);
    if (static_cast<int>(m.levels.size()) < count) {
      throw NumericalError("propagation grid supports fewer than " + std::to_string(count) +
                           " levels in channel " + to_string(c));
    }
    manifolds.emplace(c, std::move(m));
  }

  const int intervals = config.samples - 1;
  const long per_sample = std::max<long>(1, static_cast<long>(std::ceil((t1 - t0) / intervals / dt_max)));
  const long steps = per_sample * intervals;
  const double dt = (t1 - t0) / static_cast<double>(steps);

  SplitOperator op(system, config.grid, channels, dt, config.absorber);
  const auto& start = chain.states.front();
  op.wavefunction().col(op.channel_index({start.e, start.J})) =
      manifolds.at({start.e, start.J}).levels[start.v].wavefunction.cast<std::complex<double>>();

  std::vector<std::pair<const Eigen::VectorXd*, int>> proj;
  for (const auto& s : states) {
    proj.emplace_back(&manifolds.at({s.e, s.J}).levels[s.v].wavefunction, op.channel_index({s.e, s.J}));
  }

  GridResult res;
  res.channels = channels;
  res.dt = dt;
  res.steps = steps;
  res.trace.states = states;
  const int n_chain = chain.size();
  auto record = [&](double t) {
    Eigen::VectorXd p(static_cast<Eigen::Index>(states.size()));
    for (std::size_t j = 0; j < proj.size(); ++j) p[j] = std::norm(op.overlap(*proj[j].first, proj[j].second));
    const double leak = 1.0 - p.head(n_chain).sum() - op.absorbed();
    const double budget = std::abs(op.norm() + op.absorbed() - 1.0);
    res.max_budget_error = std::max(res.max_budget_error, budget);
    res.max_leakage = std::max(res.max_leakage, leak);
    res.trace.append(t, p, leak, op.absorbed());
    if (!std::isfinite(budget) || budget > config.norm_tolerance) {
      throw NumericalError("norm budget violated by " + std::to_string(budget) + " at t = " + std::to_string(t));
    }
  };
  record(t0);
  for (long s = 0; s < steps; ++s) {
    const double t = t0 + s * dt;
    op.step(total_field(train, t + 0.5 * dt));
    if (!op.wavefunction().allFinite()) {
      throw NumericalError("non-finite wavefunction at t = " + std::to_string(t + dt));
    }
    if ((s + 1) % per_sample == 0) record(t0 + (s + 1) * dt);
  }
  res.final_norm = op.norm();
  res.absorbed = op.absorbed();
  return res;
}

}  // namespace pingpong
