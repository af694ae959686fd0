#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <cmath>
#include <random>
#include <sstream>

#include "pingpong/potentials.hpp"
#include "pingpong/systems.hpp"
#include "pingpong/units.hpp"

using namespace pingpong;

namespace {

PotentialCurve zero_curve() {
  return PotentialCurve::tabulated("zero", {0.5, 1.0, 2.0, 3.0, 4.0}, {0.0, 0.0, 0.0, 0.0, 0.0});
}

}  // namespace

TEST(EffectivePotential, JZeroIsBareCurve) {
  const auto c = PotentialCurve::morse("X", systems::validation_morse());
  for (double r : {3.0, 5.5, 7.0, 12.0, 30.0}) {
    EXPECT_EQ(effective_potential(c, 26.9, 0, r), c(r));
  }
}

TEST(EffectivePotential, CentrifugalOnly) {
  EXPECT_DOUBLE_EQ(effective_potential(zero_curve(), 1.0, 1, 1.0), 1.0);
}

TEST(EffectivePotential, MorseAtEquilibriumHighPrecision) {
  using big = boost::multiprecision::cpp_dec_float_50;
  const auto p = systems::validation_morse();
  const double mu = systems::validation_mu();
  const auto c = PotentialCurve::morse("X", p);
  // J = 6 at R = Re: U(Re) = Te, centrifugal 42 / (2 mu Re^2).
  const big expect = big(p.Te) + big(42) / (big(2) * big(mu) * big(p.Re) * big(p.Re));
  const double got = effective_potential(c, mu, 6, p.Re);
  EXPECT_NEAR(got, expect.convert_to<double>(), 1e-18);
  EXPECT_NEAR(got, c(p.Re) + 21.0 / (mu * 49.0), 1e-18);
}

TEST(EffectivePotential, RejectsBadArguments) {
  const auto c = zero_curve();
  EXPECT_THROW(effective_potential(c, 1.0, -1, 1.0), DomainError);
  EXPECT_THROW(effective_potential(c, 1.0, 0, 0.0), DomainError);
}

TEST(MorseCurve, Shape) {
  const auto c = PotentialCurve::morse("A", {0.045, 0.8, 3.2, 0.045});
  EXPECT_DOUBLE_EQ(c(3.2), 0.045);
  EXPECT_NEAR(c(200.0), 0.09, 1e-15);
  EXPECT_DOUBLE_EQ(c.asymptote(), 0.09);
  EXPECT_THROW(PotentialCurve::morse("bad", {0.0, 1.0, 1.0, 0.0}), DomainError);
}

TEST(TableCurve, ReproducesNodes) {
  std::istringstream in("units: bohr hartree\n1 0.4\n2 0.1\n3 0.05\n4 0.07\n");
  auto t = read_table(in, TableKind::kEnergy);
  const auto c = PotentialCurve::tabulated("t", t.r, t.values);
  for (std::size_t i = 0; i < t.r.size(); ++i) EXPECT_DOUBLE_EQ(c(t.r[i]), t.values[i]);
}

TEST(TableCurve, CollinearDataIsLinear) {
  const auto c = PotentialCurve::tabulated("lin", {1, 2, 3, 4}, {1, 2, 3, 4}, Extrapolation::kNone);
  EXPECT_NEAR(c(2.5), 2.5, 1e-14);
}

TEST(TableCurve, DuplicatedRadiusIsRejected) {
  std::istringstream in("units: bohr hartree\n1 0.4\n2 0.1\n2 0.05\n4 0.07\n");
  EXPECT_THROW(read_table(in, TableKind::kEnergy), ParseError);
  EXPECT_THROW(PotentialCurve::tabulated("dup", {1, 2, 2, 4}, {0, 0, 0, 0}), DomainError);
}

TEST(TableCurve, UnitConversion) {
  std::istringstream in("# comment\nunits: angstrom cm-1\n1 100\n2 200\n3 300\n4 400  # trailing\n");
  auto t = read_table(in, TableKind::kEnergy);
  EXPECT_NEAR(t.r[1], 2.0 / units::kBohrToAngstrom, 1e-12);
  EXPECT_NEAR(t.values[2], 300.0 / units::kHartreeToWavenumber, 1e-15);
  std::istringstream d("units: bohr debye\n1 1\n2 1\n3 1\n4 1\n");
  EXPECT_NEAR(read_table(d, TableKind::kDipole).values[0], units::kDebyeToAu, 1e-15);
}

TEST(TableCurve, MalformedInput) {
  std::istringstream no_units("1 0\n2 0\n3 0\n4 0\n");
  EXPECT_THROW(read_table(no_units, TableKind::kEnergy), ParseError);
  std::istringstream short_table("units: bohr hartree\n1 0\n2 0\n");
  EXPECT_THROW(read_table(short_table, TableKind::kEnergy), ParseError);
  std::istringstream junk("units: bohr hartree\n1 0\n2 x\n3 0\n4 0\n");
  EXPECT_THROW(read_table(junk, TableKind::kEnergy), ParseError);
  std::istringstream bad_unit("units: furlong hartree\n1 0\n2 0\n3 0\n4 0\n");
  EXPECT_THROW(read_table(bad_unit, TableKind::kEnergy), ParseError);
  EXPECT_THROW(read_table_file("/nonexistent/table.dat", TableKind::kEnergy), ParseError);
}

TEST(TableCurve, Extrapolation) {
  const std::vector<double> r{2, 3, 4, 5, 6};
  const std::vector<double> u{0.1, 0.0, 0.02, 0.03, 0.035};
  const auto phys = PotentialCurve::tabulated("p", r, u);
  EXPECT_DOUBLE_EQ(phys(10.0), 0.035);
  EXPECT_DOUBLE_EQ(phys.asymptote(), 0.035);
  EXPECT_GT(phys(1.5), phys(2.0));
  EXPECT_GT(phys(1.0), phys(1.5));
  const auto none = PotentialCurve::tabulated("n", r, u, Extrapolation::kNone);
  EXPECT_THROW(none(1.0), DomainError);
  EXPECT_THROW(none(7.0), DomainError);
  auto [lo, hi] = none.validity();
  EXPECT_EQ(lo, 2.0);
  EXPECT_EQ(hi, 6.0);
}

TEST(MorseLevels, ClosedForm) {
  const auto p = systems::validation_morse();
  const double mu = systems::validation_mu();
  const auto s = morse_levels(p.De, p.a, p.Re, mu, 10);
  ASSERT_EQ(s.energies.size(), 10u);
  const double w = p.a * std::sqrt(2.0 * p.De / mu);
  const double wx = w * w / (4.0 * p.De);
  for (int n = 0; n < 10; ++n) {
    EXPECT_NEAR(s.energies[n], w * (n + 0.5) - wx * (n + 0.5) * (n + 0.5), 1e-16);
  }
}

TEST(MorseLevels, HarmonicLimit) {
  const double mu = 1000.0, a = 0.5;
  for (double De : {1e2, 1e4, 1e6}) {
    const auto s = morse_levels(De, a, 2.0, mu, 2);
    const double w = a * std::sqrt(2.0 * De / mu);
    EXPECT_NEAR((s.energies[1] - s.energies[0]) / w, 1.0, 3.0 * w / (4.0 * De) * 1.01);
  }
}

TEST(MorseLevels, BoundedByDissociation) {
  const double De = 0.06, a = 1.0, mu = units::amu(1.0);
  const auto s = morse_levels(De, a, 2.5, mu, 1000);
  EXPECT_TRUE(s.truncated);
  EXPECT_EQ(static_cast<int>(s.energies.size()), morse_bound_count(De, a, mu));
  for (double e : s.energies) EXPECT_LT(e, De);
  for (std::size_t i = 1; i < s.energies.size(); ++i) EXPECT_GT(s.energies[i], s.energies[i - 1]);
}

TEST(Dipole, Forms) {
  EXPECT_EQ(DipoleFunction::constant(2.5)(7.0), 2.5);
  EXPECT_DOUBLE_EQ(DipoleFunction::linear(1.0, 0.5)(4.0), 3.0);
  const auto g = DipoleFunction::gaussian(1.0, 0.5, 3.0, 1.5);
  EXPECT_DOUBLE_EQ(g(3.0), 1.5);
  EXPECT_DOUBLE_EQ(g(4.5), 1.0 + 0.5 * std::exp(-1.0));
  const auto t = DipoleFunction::tabulated({1, 2, 3, 4}, {1, 2, 3, 4});
  EXPECT_EQ(t(0.0), 1.0);
  EXPECT_EQ(t(9.0), 4.0);
  EXPECT_NEAR(t(2.25), 2.25, 1e-14);
  EXPECT_THROW(DipoleFunction::gaussian(1.0, 1.0, 1.0, 0.0), DomainError);
}

TEST(System, ToyParameters) {
  const auto s = systems::toy();
  EXPECT_DOUBLE_EQ(s.mu(), units::amu(1.0));
  EXPECT_DOUBLE_EQ(s.curve(Electronic::X).asymptote(), 0.06);
  EXPECT_DOUBLE_EQ(s.curve(Electronic::A).asymptote(), 0.09);
  EXPECT_THROW(ElectronicSystem(0.0, s.curve(Electronic::X), s.curve(Electronic::A), s.dipole()), DomainError);
}

TEST(Electronic, Parsing) {
  EXPECT_EQ(parse_electronic("X"), Electronic::X);
  EXPECT_EQ(parse_electronic("A"), Electronic::A);
  EXPECT_EQ(partner(Electronic::X), Electronic::A);
  EXPECT_THROW(parse_electronic("B"), ParseError);
}

TEST(Spline, RandomCubicReproducedOnNodes) {
  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x{0.0}, y{u(rng)};
    for (int i = 1; i < 12; ++i) {
      x.push_back(x.back() + 0.1 + std::abs(u(rng)));
      y.push_back(u(rng));
    }
    const CubicSpline s(x, y);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(s(x[i]), y[i], 1e-13);
  }
}
