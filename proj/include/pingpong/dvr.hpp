#pragma once

// Colbert-Miller discrete variable representation of the radial
// Schroedinger equation for one (electronic state, J) manifold.

#include <lapacke.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "pingpong/errors.hpp"
#include "pingpong/potentials.hpp"

namespace pingpong {

/// Uniform grid R_i = r_min + i * spacing, i = 0..n_points-1.
class RadialGrid {
 public:
  RadialGrid(double r_min, double r_max, int n_points)
      : r_min_(r_min), r_max_(r_max), n_(n_points) {
    if (n_points < 8) throw DomainError("radial grid needs at least 8 points");
    if (r_min < 0.0) throw DomainError("radial grid must start at R >= 0");
    if (!(r_max > r_min)) throw DomainError("radial grid needs r_max > r_min");
  }

  /// 35 bohr / 7001 points, used for level structure.
  static RadialGrid eigensolver_default() { return {1.0, 36.0, 7001}; }
  /// 20 bohr / 2001 points, used for wave-packet propagation.
  static RadialGrid propagation_default() { return {1.0, 21.0, 2001}; }

  double r_min() const { return r_min_; }
  double r_max() const { return r_max_; }
  int size() const { return n_; }
  double spacing() const { return (r_max_ - r_min_) / (n_ - 1); }
  double operator[](int i) const { return r_min_ + i * spacing(); }

  Eigen::VectorXd points() const {
    Eigen::VectorXd r(n_);
    for (int i = 0; i < n_; ++i) r[i] = (*this)[i];
    return r;
  }

  friend bool operator==(const RadialGrid& a, const RadialGrid& b) {
    return a.r_min_ == b.r_min_ && a.r_max_ == b.r_max_ && a.n_ == b.n_;
  }

 private:
  double r_min_;
  double r_max_;
  int n_;
};

/// (electronic state, v, J)
struct StateLabel {
  Electronic e = Electronic::X;
  int v = 0;
  int J = 0;

  friend bool operator==(const StateLabel&, const StateLabel&) = default;
  friend auto operator<=>(const StateLabel& a, const StateLabel& b) {
    if (auto c = static_cast<int>(a.e) <=> static_cast<int>(b.e); c != 0) return c;
    if (auto c = a.J <=> b.J; c != 0) return c;
    return a.v <=> b.v;
  }
};

/// "X:5:4" style label used in CSV headers and config files.
inline std::string to_string(const StateLabel& s) {
  return std::string(to_string(s.e)) + ":" + std::to_string(s.v) + ":" + std::to_string(s.J);
}

inline StateLabel parse_state(const std::string& text) {
  auto c1 = text.find(':');
  auto c2 = c1 == std::string::npos ? c1 : text.find(':', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos) {
    throw ParseError("state '" + text + "' is not of the form e:v:J");
  }
  StateLabel s;
  s.e = parse_electronic(text.substr(0, c1));
  try {
    std::size_t used = 0;
    const std::string vs = text.substr(c1 + 1, c2 - c1 - 1);
    const std::string js = text.substr(c2 + 1);
    s.v = std::stoi(vs, &used);
    if (used != vs.size()) throw std::invalid_argument(vs);
    s.J = std::stoi(js, &used);
    if (used != js.size()) throw std::invalid_argument(js);
  } catch (const std::logic_error&) {
    throw ParseError("state '" + text + "' has non-integer quantum numbers");
  }
  if (s.v < 0 || s.J < 0) throw ParseError("state '" + text + "' has negative quantum numbers");
  return s;
}

struct VibrationalLevel {
  StateLabel label;
  double energy;
  bool bound;  // below the dissociation asymptote
  RadialGrid grid;
  /// Samples on `grid`, normalised so that spacing * sum(phi^2) = 1.
  Eigen::VectorXd wavefunction;
};

/// All computed levels of one (e, J) manifold on one grid.
struct Manifold {
  Electronic e;
  int J;
  RadialGrid grid;
  double asymptote;
  std::vector<VibrationalLevel> levels;

  const VibrationalLevel& level(int v) const {
    if (v < 0 || v >= static_cast<int>(levels.size())) {
      throw DomainError("level v=" + std::to_string(v) + " not available in manifold " +
                        std::string(to_string(e)) + " J=" + std::to_string(J) + " (" +
                        std::to_string(levels.size()) + " levels computed)");
    }
    return levels[v];
  }
  int bound_count() const {
    return static_cast<int>(std::count_if(levels.begin(), levels.end(),
                                          [](const auto& l) { return l.bound; }));
  }
};

/// Colbert-Miller kinetic energy on a uniform grid (infinite-interval
/// formula restricted to the box):
///   T_ii = pi^2/3 / (2 mu dR^2),  T_ij = 2 (-1)^(i-j) / (i-j)^2 / (2 mu dR^2).
inline Eigen::MatrixXd kinetic_matrix(const RadialGrid& grid, double mu) {
  if (!(mu > 0.0)) throw DomainError("kinetic_matrix: mu must be positive");
  const int n = grid.size();
  const double dr = grid.spacing();
  const double c = 1.0 / (2.0 * mu * dr * dr);
  Eigen::MatrixXd t(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int k = i - j;
      t(i, j) = k == 0 ? c * std::numbers::pi * std::numbers::pi / 3.0
                       : c * ((k & 1) ? -2.0 : 2.0) / (static_cast<double>(k) * k);
    }
  }
  return t;
}

/// Interior sign changes, ignoring samples below `rel_threshold` of the peak
/// so that round-off in the classically forbidden tails is not counted.
inline int count_nodes(const Eigen::VectorXd& phi, double rel_threshold = 1e-6) {
  const double cut = rel_threshold * phi.cwiseAbs().maxCoeff();
  int nodes = 0;
  int last_sign = 0;
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    if (std::abs(phi[i]) <= cut) continue;
    const int s = phi[i] > 0.0 ? 1 : -1;
    if (last_sign != 0 && s != last_sign) ++nodes;
    last_sign = s;
  }
  return nodes;
}

namespace detail {

// First lobe above 1% of the peak is made positive.
inline void fix_sign(Eigen::Ref<Eigen::VectorXd> phi) {
  const double cut = 1e-2 * phi.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    if (std::abs(phi[i]) > cut) {
      if (phi[i] < 0.0) phi = -phi;
      return;
    }
  }
}

}  // namespace detail

/// Lowest eigenpairs of T + diag(V_J) for one manifold. With no `n_levels`,
/// every level below the dissociation asymptote is returned.
inline Manifold solve_manifold(const ElectronicSystem& system, Electronic e, int J,
                               const RadialGrid& grid, std::optional<int> n_levels = std::nullopt) {
  const auto& curve = system.curve(e);
  auto [lo, hi] = system.validity();
  if (grid.r_min() <= 0.0) throw DomainError("solve_manifold: grid must not include R = 0");
  if (grid.r_min() < lo || grid.r_max() > hi) {
    throw DomainError("solve_manifold: grid extends outside the curves' validity interval");
  }
  const int n = grid.size();
  Eigen::MatrixXd h = kinetic_matrix(grid, system.mu());
  double vmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double v = effective_potential(curve, system.mu(), J, grid[i]);
    if (!std::isfinite(v)) throw NumericalError("solve_manifold: non-finite potential on grid");
    h(i, i) += v;
    vmin = std::min(vmin, v);
  }

  Manifold m{e, J, grid, curve.asymptote(), {}};
  if (n_levels && *n_levels <= 0) return m;
  const Eigen::MatrixXd h_copy = h;  // dsyevr overwrites its input

  lapack_int found = 0;
  Eigen::VectorXd w(n);
  const lapack_int want = n_levels ? std::min(*n_levels, n) : n;
  Eigen::MatrixXd z(n, want);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  lapack_int info = 0;
  if (n_levels) {
    info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, h.data(), n, 0.0, 0.0, 1, want, 0.0,
                          &found, w.data(), z.data(), n, support.data());
  } else {
    if (!(m.asymptote > vmin)) return m;
    info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'V', 'L', n, h.data(), n, vmin - 1.0, m.asymptote,
                          0, 0, 0.0, &found, w.data(), z.data(), n, support.data());
  }
  if (info != 0) {
    throw NumericalError("eigensolver failed (dsyevr info=" + std::to_string(info) +
                         ") for a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
  }

  // A broken BLAS build can return valid eigenvalues with garbage vectors;
  // check the residuals before handing anything downstream.
  if (found > 0) {
    const auto zf = z.leftCols(found);
    const double scale = std::max(1.0, h_copy.diagonal().cwiseAbs().maxCoeff());
    const Eigen::MatrixXd resid = h_copy * zf - zf * w.head(found).asDiagonal();
    const double worst = resid.colwise().norm().maxCoeff();
    if (!(worst < 1e-8 * scale)) {
      throw NumericalError("eigensolver returned inaccurate eigenvectors (residual " + std::to_string(worst) +
                           ") for a " + std::to_string(n) + "x" + std::to_string(n) +
                           " matrix; check the BLAS/LAPACK build (OpenBLAS: try OPENBLAS_CORETYPE=Haswell)");
    }
  }

  const double norm = 1.0 / std::sqrt(grid.spacing());
  m.levels.reserve(found);
  for (lapack_int k = 0; k < found; ++k) {
    VibrationalLevel lvl{{e, static_cast<int>(k), J}, w[k], w[k] < m.asymptote, grid,
                         z.col(k) * norm};
    detail::fix_sign(lvl.wavefunction);
    m.levels.push_back(std::move(lvl));
  }
  return m;
}

/// Solves several manifolds, up to `jobs` at a time.
inline std::vector<Manifold> solve_manifolds(const ElectronicSystem& system,
                                             const std::vector<std::pair<Electronic, int>>& keys,
                                             const RadialGrid& grid,
                                             std::optional<int> n_levels = std::nullopt,
                                             int jobs = 1) {
  std::vector<Manifold> out;
  out.reserve(keys.size());
  jobs = std::max(1, jobs);
  for (std::size_t start = 0; start < keys.size(); start += jobs) {
    std::vector<std::future<Manifold>> batch;
    const std::size_t stop = std::min(keys.size(), start + static_cast<std::size_t>(jobs));
    for (std::size_t i = start; i < stop; ++i) {
      if (jobs == 1) {
        out.push_back(solve_manifold(system, keys[i].first, keys[i].second, grid, n_levels));
      } else {
        batch.push_back(std::async(std::launch::async, [&, i] {
          return solve_manifold(system, keys[i].first, keys[i].second, grid, n_levels);
        }));
      }
    }
    for (auto& f : batch) out.push_back(f.get());
  }
  return out;
}

}  // namespace pingpong
