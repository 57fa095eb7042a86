#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "spiro/errors.hpp"
#include "spiro/fields.hpp"

namespace spiro {
namespace {

struct OracleRow {
  int l, m;
  double theta, phi, y, dtheta, dphi, v_theta, v_phi;
};

constexpr OracleRow kOracle[] = {
#include "bracket_oracle_values.inc"
};

TEST(BracketOracle, HarmonicsMatchSymbolicExpansion) {
  for (const auto& r : kOracle) {
    const SphericalPoint p(r.theta, r.phi);
    const HarmonicValue v = evaluate_harmonic({r.l, r.m}, p);
    EXPECT_NEAR(v.value, r.y, 1e-12) << r.l << "," << r.m;
    EXPECT_NEAR(v.gradient.dtheta, r.dtheta, 1e-12) << r.l << "," << r.m;
    EXPECT_NEAR(v.gradient.dphi, r.dphi, 1e-12) << r.l << "," << r.m;
  }
}

TEST(BracketOracle, FieldComponentsMatchSymbolicBracket) {
  int checked = 0;
  for (const auto& r : kOracle) {
    const auto x = hamiltonian_components({{r.l, r.m}}, {r.theta, r.phi});
    EXPECT_NEAR(x.v_theta, r.v_theta, 1e-9) << r.l << "," << r.m;
    EXPECT_NEAR(x.v_phi, r.v_phi, 1e-9) << r.l << "," << r.m;
    ++checked;
  }
  EXPECT_EQ(checked, 16 * 21);
}

TEST(Hamiltonian, ConstantHamiltonianGivesZeroField) {
  const auto x = hamiltonian_components({{0, 0}}, {0.7, 2.0});
  EXPECT_EQ(x.v_theta, 0.0);
  EXPECT_EQ(x.v_phi, 0.0);
}

TEST(Hamiltonian, Y10IsAzimuthalRotation) {
  const double k = std::sqrt(3.0 / (4.0 * kPi));
  for (double t : {0.2, 1.0, 2.5}) {
    const auto x = hamiltonian_components({{1, 0}}, {t, 1.3});
    EXPECT_EQ(x.v_theta, 0.0);
    EXPECT_NEAR(x.v_phi, -k * std::sin(t) * std::sin(t), 1e-15);
  }
}

TEST(Hamiltonian, BivectorContraction) {
  // {H, f} computed through the bivector equals X_H applied to df.
  const SphericalPoint p(1.1, 0.4);
  const auto dH = harmonic_gradient({3, -2}, p);
  const auto df = harmonic_gradient({2, 1}, p);
  const auto x = hamiltonian_vector(p, dH);
  EXPECT_NEAR(PoissonBivector::contract(p.theta(), dH, df),
              x.v_theta * df.dtheta + x.v_phi * df.dphi, 1e-13);
  EXPECT_NEAR(PoissonBivector::contract(p.theta(), dH, df),
              -PoissonBivector::contract(p.theta(), df, dH), 1e-15);
}

TEST(Hamiltonian, Linearity) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> theta(0.05, kPi - 0.05);
  std::uniform_real_distribution<double> phi(0.0, kTwoPi);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    const SphericalPoint p(theta(gen), phi(gen));
    const double a = coef(gen);
    const double b = coef(gen);
    const auto g1 = harmonic_gradient({4, 3}, p);
    const auto g2 = harmonic_gradient({7, -5}, p);
    const HarmonicGradient combo{a * g1.dtheta + b * g2.dtheta,
                                 a * g1.dphi + b * g2.dphi};
    const auto x = hamiltonian_vector(p, combo);
    const auto x1 = hamiltonian_vector(p, g1);
    const auto x2 = hamiltonian_vector(p, g2);
    EXPECT_NEAR(x.v_theta, a * x1.v_theta + b * x2.v_theta, 1e-12);
    EXPECT_NEAR(x.v_phi, a * x1.v_phi + b * x2.v_phi, 1e-12);
  }
}

TEST(Hamiltonian, ZeroHamiltonianZeroField) {
  const auto x = hamiltonian_vector({1.0, 1.0}, HarmonicGradient{0.0, 0.0});
  EXPECT_EQ(x.v_theta, 0.0);
  EXPECT_EQ(x.v_phi, 0.0);
}

TEST(Hamiltonian, RejectsPoles) {
  EXPECT_THROW(hamiltonian_components({{2, 1}}, {0.0, 0.0}), DomainError);
}

TEST(EnergyDrift, VanishesEverywhere) {
  EXPECT_EQ(energy_drift({{0, 0}}, {1.0, 2.0}), 0.0);
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> theta(1e-3, kPi - 1e-3);
  std::uniform_real_distribution<double> phi(0.0, kTwoPi);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    worst = std::max(worst,
                     std::abs(energy_drift({{3, 2}}, {theta(gen), phi(gen)})));
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(EvaluateOnSpiral, LengthOrderAndZeros) {
  const SpiralCurve curve{32.0, 100, 0.01};
  const auto zero = evaluate_on_spiral({{0, 0}}, curve);
  ASSERT_EQ(zero.size(), 100u);
  for (const auto& s : zero) {
    EXPECT_EQ(s.v_theta, 0.0);
    EXPECT_EQ(s.v_phi, 0.0);
  }
  const auto y10 = evaluate_on_spiral({{1, 0}}, curve);
  ASSERT_EQ(y10.size(), 100u);
  for (const auto& s : y10) EXPECT_EQ(s.v_theta, 0.0);

  const auto pts = spiral_sample(curve);
  const auto f = evaluate_on_spiral({{5, -3}}, curve);
  ASSERT_EQ(f.size(), 100u);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(f[i].point, pts[i]);
}

TEST(Ambient, PushforwardIsTangent) {
  const auto x = hamiltonian_components({{3, 1}}, {0.9, 2.2});
  const auto v = to_ambient(x);
  const auto p = x.point.cartesian();
  EXPECT_NEAR(v[0] * p[0] + v[1] * p[1] + v[2] * p[2], 0.0, 1e-14);
}

}  // namespace
}  // namespace spiro
