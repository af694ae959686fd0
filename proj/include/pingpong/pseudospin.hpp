#pragma once

// SU(N) pseudospin picture of a resonant chain: the RWA Hamiltonian of a
// chain with the sqrt(k(N-k)) Rabi pattern is Omega_0(t) * 2 S_x for spin
// s = (N-1)/2, so the populations follow a closed-form binomial law in the
// accumulated area of Omega_0.

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "pingpong/chain.hpp"
#include "pingpong/errors.hpp"
#include "pingpong/trace.hpp"

namespace pingpong {

struct SpinRep {
  double s;
  Eigen::MatrixXcd Sx;
  Eigen::MatrixXcd Sy;
  Eigen::MatrixXcd Sz;

  int dim() const { return static_cast<int>(Sx.rows()); }
};

namespace detail {
inline int twice_spin(double s) {
  const double two_s = 2.0 * s;
  const long r = std::lround(two_s);
  if (s < 0.0 || std::abs(two_s - static_cast<double>(r)) > 1e-12) {
    throw DomainError("spin quantum number must be a non-negative half-integer");
  }
  return static_cast<int>(r);
}
}  // namespace detail

/// Spin matrices in the basis m = -s..+s; basis index i corresponds to
/// m = i - s, which is chain state i.
///   <m'|S_x|m> = (delta_{m',m+1} + delta_{m'+1,m}) sqrt(s(s+1) - m'm) / 2
inline SpinRep spin_matrices(double s) {
  const int n = detail::twice_spin(s) + 1;
  SpinRep rep{s, Eigen::MatrixXcd::Zero(n, n), Eigen::MatrixXcd::Zero(n, n),
              Eigen::MatrixXcd::Zero(n, n)};
  const std::complex<double> i1(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    const double m = i - s;
    rep.Sz(i, i) = m;
    if (i + 1 < n) {
      const double mp = m + 1.0;
      const double c = 0.5 * std::sqrt(s * (s + 1.0) - mp * m);
      rep.Sx(i + 1, i) = c;
      rep.Sx(i, i + 1) = c;
      // S_y = (S+ - S-)/(2i); S+ |m> has amplitude 2c on |m+1>.
      rep.Sy(i + 1, i) = -i1 * c;
      rep.Sy(i, i + 1) = i1 * c;
    }
  }
  return rep;
}

/// |c_m|^2 = C(2s, s-m) cos^{2(s-m)}(area) sin^{2(s+m)}(area), starting from m = -s.
inline double populations_analytic(double s, double area, double m) {
  const int two_s = detail::twice_spin(s);
  const double k = s - m;  // number of cos factors / 2
  const long ki = std::lround(k);
  if (std::abs(k - static_cast<double>(ki)) > 1e-12 || ki < 0 || ki > two_s) {
    throw DomainError("magnetic quantum number out of range");
  }
  const double c2 = std::pow(std::cos(area), 2);
  const double s2 = std::pow(std::sin(area), 2);
  return boost::math::binomial_coefficient<double>(two_s, static_cast<unsigned>(ki)) *
         std::pow(c2, static_cast<double>(ki)) * std::pow(s2, static_cast<double>(two_s - ki));
}

/// Populations of all 2s+1 states, ordered by chain index.
inline Eigen::VectorXd populations_analytic(double s, double area) {
  const int n = detail::twice_spin(s) + 1;
  Eigen::VectorXd p(n);
  for (int i = 0; i < n; ++i) p[i] = populations_analytic(s, area, i - s);
  return p;
}

/// Accumulated area of the common profile between consecutive `times`.
inline std::vector<double> accumulated_area(const ChainSpec& chain, const PulseTrain& train,
                                            std::span<const double> times) {
  std::vector<double> area(times.size(), 0.0);
  auto f = [&](double t) { return common_profile(chain, train, t); };
  for (std::size_t i = 1; i < times.size(); ++i) {
    area[i] = area[i - 1] +
              boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, times[i - 1], times[i], 8, 1e-14);
  }
  return area;
}

/// Pseudospin populations along `times` for a common-profile train.
/// Leakage is identically zero in this picture.
inline PopulationTrace trace_analytic(const ChainSpec& chain, const PulseTrain& train,
                                      std::span<const double> times) {
  if (!has_common_profile(train)) {
    throw DomainError("trace_analytic requires pulses sharing one centre and width");
  }
  const double s = 0.5 * (chain.size() - 1);
  PopulationTrace tr;
  tr.states = chain.states;
  const auto area = accumulated_area(chain, train, times);
  for (std::size_t i = 0; i < times.size(); ++i) {
    tr.append(times[i], populations_analytic(s, area[i]), 0.0);
  }
  return tr;
}

}  // namespace pingpong
