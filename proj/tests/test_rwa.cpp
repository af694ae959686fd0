#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pingpong/pseudospin.hpp"
#include "pingpong/rwa_dynamics.hpp"

using namespace pingpong;

namespace {

ChainSpec synthetic_chain(int n) {
  ChainSpec c;
  for (int i = 0; i < n; ++i) {
    c.states.push_back({i % 2 == 0 ? Electronic::X : Electronic::A, i, n - 1 - i});
    c.energies.push_back(i % 2 == 0 ? -0.003 * i : 0.05 - 0.002 * i);
  }
  for (int k = 0; k + 1 < n; ++k) {
    c.dmes.push_back(k % 2 ? -0.7 : 0.9);
    c.angular.push_back(link_angular_factor(c.states[k].J, c.states[k + 1].J));
  }
  return c;
}

PulseTrain constant_train(const ChainSpec& c, double omega0, double t_end) {
  const auto eps = field_strengths(c, omega0);
  PulseTrain t;
  for (int k = 0; k < c.links(); ++k) t.pulses.push_back({eps[k], c.carrier(k), 0.0, 1.0, EnvelopeShape::kConstant});
  t.t_start = 0.0;
  t.t_end = t_end;
  return t;
}

PulseTrain gaussian_train(const ChainSpec& c, double sigma, double area = std::numbers::pi / 2) {
  PulseDesign d;
  d.sigma = sigma;
  d.area = area;
  return build_pulse_train(c, d);
}

}  // namespace

TEST(RwaHamiltonian, StructureAndPeak) {
  const auto c = synthetic_chain(7);
  const auto train = gaussian_train(c, 1000.0);
  const double om = omega0_for_area(std::numbers::pi / 2, 1000.0);
  const auto w = rwa_hamiltonian(c, train, 2500.0);
  const double pattern[] = {6, 10, 12, 12, 10, 6};
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) {
      EXPECT_EQ(w(i, j), w(j, i));
      if (std::abs(i - j) != 1) EXPECT_EQ(w(i, j), 0.0);
    }
  }
  for (int k = 0; k < 6; ++k) EXPECT_NEAR(w(k, k + 1) / om, std::sqrt(pattern[k]), 1e-12);
  const auto far = rwa_hamiltonian(c, train, 2500.0 + 2.1 * 1000.0);
  EXPECT_LT(far.cwiseAbs().maxCoeff(), w.cwiseAbs().maxCoeff() * std::exp(-16.0));
}

TEST(RwaHamiltonian, CrosstalkReducesToResonantForOnePulse) {
  const auto c = synthetic_chain(2);
  const auto train = gaussian_train(c, 500.0);
  for (double t : {100.0, 1250.0, 2000.0}) {
    const auto a = rwa_hamiltonian(c, train, t);
    const auto b = rwa_hamiltonian_crosstalk(c, train, t);
    EXPECT_LT((a.cast<std::complex<double>>() - b).cwiseAbs().maxCoeff(), 1e-18);
  }
  const auto c3 = synthetic_chain(4);
  const auto t3 = gaussian_train(c3, 500.0);
  const auto x = rwa_hamiltonian_crosstalk(c3, t3, 1300.0);
  EXPECT_LT((x - x.adjoint()).cwiseAbs().maxCoeff(), 1e-18);
}

TEST(IntegrateRwa, ConstantDriveMatchesPseudospin) {
  for (int n : {2, 3, 5, 7}) {
    const auto c = synthetic_chain(n);
    const double om = 1e-3;
    const auto train = constant_train(c, om, 3000.0);
    const auto tr = integrate_rwa(c, train, {.samples = 61});
    const double s = 0.5 * (n - 1);
    for (int i = 0; i < tr.samples(); ++i) {
      const auto p = populations_analytic(s, om * tr.times[i]);
      EXPECT_LT((tr.populations.row(i).transpose() - p).cwiseAbs().maxCoeff(), 1e-6) << "N=" << n;
    }
  }
}

TEST(IntegrateRwa, TwoLevelRabiPeriod) {
  const auto c = synthetic_chain(2);
  const double om = 2e-3;
  const double period = std::numbers::pi / om;
  const auto train = constant_train(c, om, period);
  const auto tr = integrate_rwa(c, train, {.samples = 5});
  EXPECT_NEAR(tr.populations(2, 1), 1.0, 1e-10);
  EXPECT_NEAR(tr.populations(4, 0), 1.0, 1e-10);
  EXPECT_NEAR(tr.populations(1, 1), 0.5, 1e-10);
}

TEST(IntegrateRwa, GaussianSevenStateTransfer) {
  const auto c = synthetic_chain(7);
  const auto train = gaussian_train(c, 2000.0);
  const auto tr = integrate_rwa(c, train);
  EXPECT_NEAR(tr.final_populations()[6], 1.0, 1e-4);
  const auto an = trace_analytic(c, train, tr.times);
  EXPECT_LT((an.populations - tr.populations).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(IntegrateRwa, ForwardBackwardReturnsInitialState) {
  const auto c = synthetic_chain(5);
  const auto train = gaussian_train(c, 800.0, 1.1);
  Eigen::VectorXcd c0 = Eigen::VectorXcd::Zero(5);
  c0[0] = 1.0;
  const auto mid = propagate_rwa(c, train, c0, train.t_start, train.t_end, 800);
  const auto back = propagate_rwa(c, train, mid, train.t_end, train.t_start, 800);
  EXPECT_LT((back - c0).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(mid.squaredNorm(), 1.0, 1e-12);
  const auto xmid = propagate_rwa(c, train, c0, train.t_start, train.t_end, 4000, true);
  const auto xback = propagate_rwa(c, train, xmid, train.t_end, train.t_start, 4000, true);
  EXPECT_LT((xback - c0).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(IntegrateRwa, FourthOrderConvergence) {
  // Staggered pulses make W(t) non-commuting; a common profile would be
  // integrated exactly up to quadrature.
  const auto c = synthetic_chain(5);
  PulseDesign d;
  d.sigma = 800.0;
  d.area = 1.1;
  d.stagger = 300.0;
  const auto train = build_pulse_train(c, d);
  Eigen::VectorXcd c0 = Eigen::VectorXcd::Zero(5);
  c0[0] = 1.0;
  const auto ref = propagate_rwa(c, train, c0, train.t_start, train.t_end, 12800);
  const double e1 = (propagate_rwa(c, train, c0, train.t_start, train.t_end, 100) - ref).norm();
  const double e2 = (propagate_rwa(c, train, c0, train.t_start, train.t_end, 200) - ref).norm();
  const double ratio = e1 / e2;
  EXPECT_GT(ratio, 12.0);
  EXPECT_LT(ratio, 20.0);
}

TEST(IntegrateRwa, CoarseStepIsAConfigError) {
  const auto c = synthetic_chain(3);
  const auto train = gaussian_train(c, 800.0);
  EXPECT_THROW(integrate_rwa(c, train, {.dt = 500.0}), ConfigError);
  EXPECT_THROW(integrate_rwa(c, train, {.dt = -1.0}), ConfigError);
  auto bad = train;
  bad.pulses.pop_back();
  EXPECT_THROW(integrate_rwa(c, bad), DomainError);
}

TEST(IntegrateRwa, CrosstalkStaysNormalised) {
  const auto c = synthetic_chain(5);
  const auto train = gaussian_train(c, 30000.0);
  const auto tr = integrate_rwa(c, train, {.samples = 101, .crosstalk = true});
  for (int i = 0; i < tr.samples(); ++i) EXPECT_NEAR(tr.populations.row(i).sum(), 1.0, 1e-9);
  // Carriers differ by >= 2e-3 hartree, about 30 peak Rabi frequencies, so
  // the transfer survives.
  EXPECT_GT(tr.final_populations()[4], 0.95);
}

TEST(IntegrateRwa, Deterministic) {
  const auto c = synthetic_chain(4);
  const auto train = gaussian_train(c, 700.0);
  const auto a = integrate_rwa(c, train);
  const auto b = integrate_rwa(c, train);
  EXPECT_EQ(a.populations, b.populations);
}
