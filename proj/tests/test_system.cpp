#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "dissipative/builtin.hpp"
#include "dissipative/system.hpp"
#include "support/oracles.hpp"

using namespace dissipative;

namespace {

constexpr double kPi = std::numbers::pi;

ScalarField P(const std::string& s, int n = 3) { return ScalarField::parse(s, n); }

DissipativeSystem ho_synthesis(const char* rate, std::optional<ScalarField> nu = std::nullopt) {
  return DissipativeSystem(3, {P("x^2+y^2-1")}, {P("z")}, {P(rate)}, std::move(nu));
}

}  // namespace

TEST(System, CodimensionIsEnforced) {
  try {
    DissipativeSystem(3, {P("x")}, {}, {});
    FAIL();
  } catch (const InputError& e) {
    EXPECT_EQ(e.reason(), "codimension");
  }
  EXPECT_THROW(DissipativeSystem(3, {P("x")}, {P("y")}, {}), InputError);
  EXPECT_THROW(DissipativeSystem(3, {P("x1", 2)}, {P("y")}, {P("1")}), InputError);
}

TEST(Homogeneous, HarmonicExample) {
  auto sys = ho_synthesis("0");
  auto v = homogeneous_field(sys, std::vector<double>{0, 1, 0});
  EXPECT_EQ(v, (std::vector<double>{-2, 0, 0}));
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    auto p = oracle::regular_point(rng);
    auto h = homogeneous_field(sys, p);
    EXPECT_LE(oracle::max_abs_diff(h, {-2 * p[1], 2 * p[0], 0.0}), 1e-14);
  }
}

TEST(Homogeneous, DependentGradientsGiveZero) {
  // grad D = grad I direction at points on the z axis for I = x^2+y^2+z^2, D = z
  DissipativeSystem sys(3, {P("x^2+y^2+z^2")}, {P("z")}, {P("1")});
  auto v = homogeneous_field(sys, std::vector<double>{0, 0, 2});
  EXPECT_EQ(oracle::max_abs(v), 0.0);
}

TEST(Homogeneous, EulerEquilibriumGivesZero) {
  auto sc = euler_rigid_body(EulerParams{}, P("-1"), EulerCase::energyI);
  auto v = homogeneous_field(sc.system, std::vector<double>{1, 0, 0});
  EXPECT_EQ(oracle::max_abs(v), 0.0);
}

TEST(Theta, HarmonicExample) {
  auto sys = ho_synthesis("1");
  auto t = theta(sys, 1, std::vector<double>{1, 1, 0});
  EXPECT_EQ(t, (std::vector<double>{0, 0, 8}));
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20; ++i) {
    auto p = oracle::regular_point(rng);
    auto th = theta(sys, 1, p);
    EXPECT_LE(oracle::max_abs_diff(th, {0, 0, 4 * (p[0] * p[0] + p[1] * p[1])}), 1e-13);
  }
  EXPECT_THROW(theta(sys, 0, std::vector<double>{1, 1, 0}), InputError);
  EXPECT_THROW(theta(sys, 2, std::vector<double>{1, 1, 0}), InputError);
}

TEST(Theta, DependentGradientsGiveZero) {
  DissipativeSystem sys(3, {P("x^2+y^2+z^2")}, {P("z")}, {P("1")});
  EXPECT_EQ(oracle::max_abs(theta(sys, 1, std::vector<double>{0, 0, 2})), 0.0);
}

TEST(Theta, EulerBracketVector) {
  const EulerParams e;
  auto sc = euler_rigid_body(e, P("1"), EulerCase::energyI);
  const double a = 1 / e.I1, b = 1 / e.I2, c = 1 / e.I3;
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    auto p = oracle::regular_point(rng);
    const double x = p[0], y = p[1], z = p[2];
    // for n = 3, p = 1 the prefactor is h D / |W|^2 and |W|^2 equals the displayed denominator
    EXPECT_NEAR(oracle::euler_denominator(p, e),
                norm_squared(wedge_all<double>(3, {sc.system.dissipated()[0].gradient(p),
                                                   sc.system.conserved()[0].gradient(p)})),
                1e-12);
    oracle::Vec bracket{x * (b * (b - a) * y * y + c * (c - a) * z * z),
                        y * (a * (a - b) * x * x + c * (c - b) * z * z),
                        z * (a * (a - c) * x * x + b * (b - c) * y * y)};
    EXPECT_LE(oracle::relative_error(theta(sc.system, 1, p), bracket), 1e-12);
  }
  // sample next to the orbit point on the y axis
  const double y0 = std::sqrt(2 * e.I2 * (e.c - e.h * e.I3) / (e.I2 - e.I3));
  oracle::Vec q{0.05, y0, -0.04};
  oracle::Vec bq{q[0] * (b * (b - a) * q[1] * q[1] + c * (c - a) * q[2] * q[2]),
                 q[1] * (a * (a - b) * q[0] * q[0] + c * (c - b) * q[2] * q[2]),
                 q[2] * (a * (a - c) * q[0] * q[0] + b * (b - c) * q[1] * q[1])};
  EXPECT_LE(oracle::relative_error(theta(sc.system, 1, q), bq), 1e-12);
}

TEST(ControlField, HarmonicCases) {
  std::mt19937_64 rng(5);
  auto zd = harmonic_oscillator(HarmonicCase::zD, P("-(1+x^2)"));
  auto pl = harmonic_oscillator(HarmonicCase::planar, P("-(1+x^2)"));
  for (int i = 0; i < 50; ++i) {
    auto p = oracle::regular_point(rng);
    const double u = -(1 + p[0] * p[0]);
    EXPECT_LE(oracle::max_abs_diff(control_field(zd.system, p), oracle::x0_harmonic_zD(p, u)),
              1e-13);
    EXPECT_LE(oracle::relative_error(control_field(pl.system, p),
                                     oracle::x0_harmonic_planar(p, u)),
              1e-12);
  }
}

TEST(ControlField, VanishesOnOrbit) {
  for (const auto& name : builtin_names()) {
    auto sc = builtin_scenario(name, P("2+sin(x*y)"));
    for (int j = 0; j < 64; ++j) {
      auto g = sc.orbit.evaluate(sc.orbit.period() * j / 64.0);
      EXPECT_LE(oracle::max_abs(control_field(sc.system, g)), 1e-14) << name;
    }
  }
}

TEST(ControlField, SingularPointRaises) {
  auto pl = harmonic_oscillator(HarmonicCase::planar, P("-1"));
  EXPECT_THROW(control_field(pl.system, std::vector<double>{0, 0, 1}), SingularPoint);
  auto eu = euler_rigid_body(EulerParams{}, P("-1"), EulerCase::energyI);
  EXPECT_THROW(control_field(eu.system, std::vector<double>{0, 2, 0}), SingularPoint);
}

TEST(ControlField, OrientationInvariance) {
  SynthesisOptions neg;
  neg.orientation = Orientation::negative;
  std::mt19937_64 rng(6);
  for (const auto& name : builtin_names()) {
    auto sc = builtin_scenario(name, P("-(1+y^2)"));
    for (int i = 0; i < 20; ++i) {
      auto p = oracle::regular_point(rng);
      auto a = control_field(sc.system, p);
      auto b = control_field(sc.system, p, neg);
      EXPECT_LE(oracle::max_abs_diff(a, b), 1e-12 * std::max(1.0, oracle::max_abs(a)));
    }
  }
}

TEST(FullField, HarmonicSynthesisReproducesRotation) {
  auto sys = ho_synthesis("0", P("-1/2"));
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20; ++i) {
    auto p = oracle::regular_point(rng);
    EXPECT_LE(oracle::max_abs_diff(full_field(sys, p), {p[1], -p[0], 0.0}), 1e-14);
  }
  auto plain = ho_synthesis("-1");
  auto p = std::vector<double>{0.3, -0.7, 1.1};
  EXPECT_EQ(full_field(plain, p), control_field(plain, p));
}

TEST(FullField, PerturbationModeOnOrbitEqualsBase) {
  auto sc = euler_rigid_body(EulerParams{}, P("-(1+x^2)"), EulerCase::energyI);
  auto base = base_vector_field(sc.system);
  for (int j = 0; j < 32; ++j) {
    auto g = sc.orbit.evaluate(sc.orbit.period() * j / 32.0);
    EXPECT_LE(oracle::max_abs_diff(full_field(sc.system, g), base(g)), 1e-14);
  }
}

TEST(FullField, HarmonicPerturbedFields) {
  auto zd = harmonic_oscillator(HarmonicCase::zD, P("-1"));
  auto pl = harmonic_oscillator(HarmonicCase::planar, P("-1"));
  std::vector<double> p{0.4, -1.3, 0.8};
  EXPECT_LE(oracle::max_abs_diff(full_field(zd.system, p), {p[1], -p[0], -p[2]}), 1e-15);
  EXPECT_LE(oracle::max_abs_diff(full_field(pl.system, std::vector<double>{2, 0, 0}),
                                 {-0.75, -2.0, 0.0}),
            1e-15);
}

TEST(LieResiduals, BuiltinsAtRandomPoints) {
  std::mt19937_64 rng(8);
  for (const auto& name : builtin_names()) {
    auto sc = builtin_scenario(name, P("-(1+x^2)+0.3*sin(y*z)"));
    auto field = as_vector_field(sc.system);
    for (int i = 0; i < 100; ++i) {
      auto p = oracle::regular_point(rng);
      EXPECT_LE(oracle::max_abs(lie_residuals(field, sc.system, p)), 1e-9) << name;
    }
  }
}

TEST(LieResiduals, SynthesisInHigherDimensions) {
  // n = 4, k = 1, p = 2 and n = 5, k = 2, p = 2 with a nonzero rescaling
  DissipativeSystem s4(4, {P("x1^2+x2^2+x3^2+x4^2-4", 4)}, {P("x3-x1*x2", 4), P("x4+x1^3", 4)},
                       {P("-1-x1^2", 4), P("sin(x2)", 4)}, P("1+x3^2", 4));
  DissipativeSystem s5(5, {P("x1+x2^2", 5), P("x3*x4-1", 5)}, {P("x5-x1", 5), P("x2*x3+x4", 5)},
                       {P("-2", 5), P("x5", 5)}, P("cos(x1)", 5));
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (const DissipativeSystem* sys : {&s4, &s5}) {
    auto field = as_vector_field(*sys);
    int checked = 0;
    for (int i = 0; i < 100; ++i) {
      std::vector<double> p(sys->dimension());
      for (auto& v : p) v = d(rng);
      try {
        auto r = lie_residuals(field, *sys, p);
        EXPECT_LE(oracle::max_abs(r), 1e-9);
        ++checked;
      } catch (const SingularPoint&) {
      }
    }
    EXPECT_GT(checked, 90);
  }
}

TEST(LieResiduals, CompletelyIntegrableCaseConservesAll) {
  DissipativeSystem sys(3, {P("x^2+y^2-1"), P("z-x*y")}, {}, {}, P("1+z^2"));
  auto field = as_vector_field(sys);
  std::mt19937_64 rng(10);
  for (int i = 0; i < 50; ++i) {
    auto p = oracle::regular_point(rng);
    EXPECT_LE(oracle::max_abs(lie_residuals(field, sys, p)), 1e-12);
    EXPECT_EQ(oracle::max_abs(control_field(sys, p)), 0.0);
  }
}

TEST(LieResiduals, BrokenInvarianceDetected) {
  auto sc = harmonic_oscillator(HarmonicCase::zD, P("-1"));
  auto good = as_vector_field(sc.system);
  auto bad = VectorField::generic(3, [good]<typename T>(std::span<const T> x) {
    auto f = good(x);
    f[0] += 1.0;
    return f;
  });
  std::vector<double> p{0.5, 0.2, 0.3};
  auto r = lie_residuals(bad, sc.system, p);
  EXPECT_NEAR(r[0], 2 * p[0], 1e-14);  // dI/dx
  EXPECT_NEAR(r[1], 0.0, 1e-14);
}

TEST(RateTemplate, Examples) {
  auto o = harmonic_orbit();
  auto h = rate_template(RateKind::stabilizing, P("x"), 1.0);
  EXPECT_NEAR(rate_integral(h, o, 512).value, -3 * kPi, 1e-10);
  auto c1 = rate_template(RateKind::stabilizing, P("0"), 1.0);
  EXPECT_EQ(c1(std::vector<double>{0.3, 2, 1}), -1.0);
  auto d2 = rate_template(RateKind::destabilizing, P("0"), 2.0);
  EXPECT_EQ(d2(std::vector<double>{0.3, 2, 1}), 2.0);
  EXPECT_NEAR(rate_integral(d2, o, 64).value, 4 * kPi, 1e-12);
  EXPECT_THROW(rate_template(RateKind::stabilizing, P("0"), 0.0), InputError);
  EXPECT_THROW(rate_template(RateKind::destabilizing, P("0"), -1.0), InputError);
}

TEST(RateTemplate, SignBoundsOverOrbits) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> dc(0.01, 3.0);
  for (const auto& name : builtin_names()) {
    auto sc = builtin_scenario(name, P("-1"));
    const double T = sc.orbit.period();
    for (int i = 0; i < 5; ++i) {
      const double c = dc(rng);
      auto s = rate_template(RateKind::stabilizing, P("x*y-z"), c);
      auto u = rate_template(RateKind::destabilizing, P("x*y-z"), c);
      EXPECT_LE(rate_integral(s, sc.orbit, 512).value, -T * c + 1e-12);
      EXPECT_GE(rate_integral(u, sc.orbit, 512).value, T * c - 1e-12);
    }
  }
}

TEST(Regularity, HarmonicOrbitPasses) {
  for (auto which : {HarmonicCase::zD, HarmonicCase::planar}) {
    auto sc = harmonic_oscillator(which, P("-1"));
    auto rep = regularity_report(sc.system, sc.orbit, 128);
    EXPECT_TRUE(rep.pass());
    EXPECT_TRUE(rep.conserved_regular_ok);
    EXPECT_GE(rep.min_independence, 1.0 - 1e-12);
    EXPECT_LE(rep.max_membership, 1e-15);
  }
}

TEST(Regularity, EulerOrbitPasses) {
  for (auto which : {EulerCase::energyI, EulerCase::momentumI}) {
    auto sc = euler_rigid_body(EulerParams{}, P("-1"), which);
    auto rep = regularity_report(sc.system, sc.orbit, 256);
    EXPECT_TRUE(rep.pass()) << rep.max_membership << " " << rep.min_independence;
    EXPECT_LE(rep.max_membership, 1e-10);
  }
}

TEST(Regularity, EulerEquilibriumFails) {
  // degenerate levels c = h I3: the common level set is the pair of equilibria (0, 0, +-sqrt(2c))
  std::vector<ScalarField> base{P("(1/1-1/2)*y*z"), P("(1/3-1/1)*z*x"), P("(1/2-1/3)*x*y")};
  DissipativeSystem sys(3, {P("0.5*(x^2/3+y^2/2+z^2)-1")}, {P("0.5*(x^2+y^2+z^2)-1")}, {P("-1")},
                        std::nullopt, base);
  auto eq = PeriodicOrbit::closed_form(3, 1.0, []<typename T>(T) {
    return std::vector<T>{T(0.0), T(0.0), T(-std::sqrt(2.0))};
  });
  auto rep = regularity_report(sys, eq, 16);
  EXPECT_TRUE(rep.membership_ok);
  EXPECT_FALSE(rep.independence_ok);
  EXPECT_FALSE(rep.pass());
  EXPECT_EQ(rep.min_independence, 0.0);
}

TEST(Regularity, DuplicatedFieldFails) {
  DissipativeSystem sys(3, {P("z")}, {P("z")}, {P("-1")}, std::nullopt,
                        std::vector<ScalarField>{P("y"), P("-x"), P("0")});
  auto rep = regularity_report(sys, harmonic_orbit(), 32);
  EXPECT_NEAR(rep.min_regular_value, 0.0, 1e-15);
  EXPECT_FALSE(rep.regular_value_ok);
  EXPECT_FALSE(rep.pass());
  auto f = rep.failures();
  EXPECT_NE(std::find(f.begin(), f.end(), "regular_value"), f.end());
}

TEST(Regularity, OffManifoldOrbitFailsMembership) {
  DissipativeSystem sys(3, {P("x^2+y^2-2")}, {P("z")}, {P("-1")}, std::nullopt,
                        std::vector<ScalarField>{P("y"), P("-x"), P("0")});
  auto rep = regularity_report(sys, harmonic_orbit(), 32);
  EXPECT_FALSE(rep.membership_ok);
  EXPECT_NEAR(rep.max_membership, 1.0, 1e-14);
}
