#include <gtest/gtest.h>

#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <numbers>
#include <random>

#include "pingpong/pseudospin.hpp"

using namespace pingpong;

namespace {

ChainSpec synthetic_chain(int n) {
  ChainSpec c;
  for (int i = 0; i < n; ++i) {
    c.states.push_back({i % 2 == 0 ? Electronic::X : Electronic::A, i, n - 1 - i});
    c.energies.push_back(i % 2 == 0 ? -0.001 * i : 0.05 - 0.001 * i);
  }
  for (int k = 0; k + 1 < n; ++k) {
    c.dmes.push_back(0.5 + 0.1 * k);
    c.angular.push_back(link_angular_factor(c.states[k].J, c.states[k + 1].J));
  }
  return c;
}

// |<m|exp(-i area 2 Sx)|-s>|^2 by a generic matrix exponential.
Eigen::VectorXd exponential_oracle(double s, double area) {
  const auto rep = spin_matrices(s);
  const Eigen::MatrixXcd u = (std::complex<double>(0.0, -2.0 * area) * rep.Sx).exp();
  return u.col(0).cwiseAbs2();
}

}  // namespace

TEST(SpinMatrices, SpinHalfIsHalfPauli) {
  const auto r = spin_matrices(0.5);
  ASSERT_EQ(r.dim(), 2);
  EXPECT_NEAR(std::abs(r.Sx(0, 1) - 0.5), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(r.Sx(0, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(r.Sz(0, 0) + 0.5), 0.0, 1e-15);
}

TEST(SpinMatrices, LadderElement) {
  const auto r = spin_matrices(3.0);
  // m' = 3 is index 6, m = 2 is index 5.
  EXPECT_NEAR(r.Sx(6, 5).real(), 0.5 * std::sqrt(6.0), 1e-15);
  const double expect[] = {6, 10, 12, 12, 10, 6};
  for (int k = 0; k < 6; ++k) EXPECT_NEAR(2.0 * r.Sx(k, k + 1).real(), std::sqrt(expect[k]), 1e-14);
}

TEST(SpinMatrices, Algebra) {
  const std::complex<double> i1(0.0, 1.0);
  for (double s : {0.5, 1.0, 1.5, 3.0, 5.0}) {
    const auto r = spin_matrices(s);
    const Eigen::MatrixXcd comm = r.Sx * r.Sy - r.Sy * r.Sx;
    EXPECT_LT((comm - i1 * r.Sz).cwiseAbs().maxCoeff(), 1e-13);
    const Eigen::MatrixXcd cas = r.Sx * r.Sx + r.Sy * r.Sy + r.Sz * r.Sz;
    const auto id = Eigen::MatrixXcd::Identity(r.dim(), r.dim());
    EXPECT_LT((cas - s * (s + 1.0) * id).cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_THROW(spin_matrices(0.3), DomainError);
  EXPECT_THROW(spin_matrices(-1.0), DomainError);
}

TEST(Populations, Endpoints) {
  for (double s : {0.5, 1.0, 3.0}) {
    const auto p0 = populations_analytic(s, 0.0);
    EXPECT_DOUBLE_EQ(p0[0], 1.0);
    EXPECT_NEAR(p0.tail(p0.size() - 1).sum(), 0.0, 1e-300);
    const auto p1 = populations_analytic(s, std::numbers::pi / 2);
    EXPECT_NEAR(p1[p1.size() - 1], 1.0, 1e-14);
    EXPECT_NEAR(p1.head(p1.size() - 1).sum(), 0.0, 1e-14);
  }
}

TEST(Populations, BinomialAtQuarterPi) {
  const auto p = populations_analytic(3.0, std::numbers::pi / 4);
  const double expect[] = {1, 6, 15, 20, 15, 6, 1};
  for (int i = 0; i < 7; ++i) EXPECT_NEAR(p[i], expect[i] / 64.0, 1e-15);
  const auto q = exponential_oracle(3.0, std::numbers::pi / 4);
  for (int i = 0; i < 7; ++i) EXPECT_NEAR(q[i], expect[i] / 64.0, 1e-13);
}

TEST(Populations, RandomAreasAgreeWithExponential) {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (double s : {0.5, 1.0, 1.5, 2.0, 4.0}) {
    for (int trial = 0; trial < 25; ++trial) {
      const double a = u(rng);
      const auto p = populations_analytic(s, a);
      EXPECT_NEAR(p.sum(), 1.0, 1e-12);
      EXPECT_LT((p - exponential_oracle(s, a)).cwiseAbs().maxCoeff(), 1e-11) << "s=" << s << " area=" << a;
    }
  }
}

TEST(Populations, RejectsBadQuantumNumbers) {
  EXPECT_THROW(populations_analytic(1.0, 0.3, 0.5), DomainError);
  EXPECT_THROW(populations_analytic(1.0, 0.3, 2.0), DomainError);
  EXPECT_NO_THROW(populations_analytic(1.5, 0.3, -0.5));
}

TEST(Trace, AnalyticTrainReachesTarget) {
  const auto c = synthetic_chain(7);
  PulseDesign d;
  d.sigma = 1000.0;
  const auto train = build_pulse_train(c, d);
  const auto times = sample_times(train, 201);
  const auto tr = trace_analytic(c, train, times);
  EXPECT_EQ(tr.samples(), 201);
  EXPECT_NEAR(tr.final_populations()[6], 1.0, 1e-9);
  for (int i = 0; i < tr.samples(); ++i) EXPECT_NEAR(tr.populations.row(i).sum(), 1.0, 1e-12);
  for (int s = 1; s < 6; ++s) EXPECT_LT(tr.populations.col(s).maxCoeff(), 0.5);
  for (int i = 1; i < tr.samples(); ++i) EXPECT_LE(tr.populations(i, 0), tr.populations(i - 1, 0) + 1e-15);
}

TEST(Trace, IntermediateMaximumIsBinomialPeak) {
  // Middle state of N = 7 peaks at C(6,3)/2^6 when the area reaches pi/4.
  const auto p = populations_analytic(3.0, std::numbers::pi / 4);
  EXPECT_NEAR(p[3], 0.3125, 1e-15);
  double best = 0.0;
  for (int i = 0; i <= 2000; ++i) best = std::max(best, populations_analytic(3.0, i * std::numbers::pi / 4000, 0.0));
  EXPECT_NEAR(best, 0.3125, 1e-12);
}

TEST(Trace, StaggeredTrainIsRejected) {
  const auto c = synthetic_chain(3);
  PulseDesign d;
  d.sigma = 100.0;
  d.stagger = 10.0;
  const auto train = build_pulse_train(c, d);
  const auto times = sample_times(train, 11);
  EXPECT_THROW(trace_analytic(c, train, times), DomainError);
  EXPECT_THROW(sample_times(train, 1), DomainError);
}

TEST(Trace, AccumulatedAreaIsMonotone) {
  const auto c = synthetic_chain(4);
  PulseDesign d;
  d.sigma = 500.0;
  d.area = 1.3;
  const auto train = build_pulse_train(c, d);
  const auto times = sample_times(train, 101);
  const auto area = accumulated_area(c, train, times);
  for (std::size_t i = 1; i < area.size(); ++i) EXPECT_GE(area[i], area[i - 1]);
  // The +-2.5 sigma window holds essentially the whole Gaussian-4 area.
  EXPECT_NEAR(area.back(), 1.3, 1e-12);
}
