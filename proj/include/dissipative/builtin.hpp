#pragma once

// Builtin scenarios: the three-dimensional harmonic oscillator with either
// assignment of conserved/dissipated integral, and Euler's free rigid body
// with its elliptic periodic orbit.

#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "dissipative/errors.hpp"
#include "dissipative/expr.hpp"
#include "dissipative/orbit.hpp"
#include "dissipative/specfun.hpp"
#include "dissipative/system.hpp"

namespace dissipative {

struct Scenario {
  std::string name;
  DissipativeSystem system;
  PeriodicOrbit orbit;
};

enum class HarmonicCase { zD, planar };

/// Circle (sin t, cos t, 0) of period 2 pi.
inline PeriodicOrbit harmonic_orbit() {
  return PeriodicOrbit::closed_form(
      3, 2.0 * std::numbers::pi,
      []<typename T>(T t) { return std::vector<T>{sin(t), cos(t), T(0.0)}; }, "harmonic");
}

/// base field (y, -x, 0); zD: I = x^2+y^2-1, D = z; planar: I = z,
/// D = x^2+y^2-1 (singular on the z axis).
inline Scenario harmonic_oscillator(HarmonicCase which, const ScalarField& rate) {
  auto P = [](const char* s) { return ScalarField::parse(s, 3); };
  std::vector<ScalarField> base{P("y"), P("-x"), P("0")};
  ScalarField cyl = P("x^2+y^2-1");
  ScalarField zf = P("z");
  if (which == HarmonicCase::zD) {
    return {"harmonic:zD",
            DissipativeSystem(3, {cyl}, {zf}, {rate}, std::nullopt, base,
                              "I⁻¹({0}) cylinder x^2+y^2=1"),
            harmonic_orbit()};
  }
  return {"harmonic:planar",
          DissipativeSystem(3, {zf}, {cyl}, {rate}, std::nullopt, base, "I⁻¹({0}) plane z=0"),
          harmonic_orbit()};
}

/// Moments of inertia and the energy/momentum levels of the orbit.
struct EulerParams {
  double I1 = 3.0;
  double I2 = 2.0;
  double I3 = 1.0;
  double h = 1.0;
  double c = 1.5;

  /// Throws InputError (reason "euler_params") naming the violated inequality.
  void validate() const {
    auto fail = [](const std::string& what) { throw InputError("euler_params", what); };
    for (double v : {I1, I2, I3, h, c}) {
      if (!std::isfinite(v)) fail("non-finite Euler parameter");
    }
    if (!(I1 > I2)) fail("I1 > I2 violated");
    if (!(I2 > I3)) fail("I2 > I3 violated");
    if (!(I3 > 0.0)) fail("I3 > 0 violated");
    if (!(h * I1 - c > 0.0)) fail("h*I1 - c > 0 violated");
    if (!(c - h * I3 > 0.0)) fail("c - h*I3 > 0 violated");
    const double k2 = modulus_squared();
    if (!(k2 >= -1e-12 && k2 < 1.0)) fail("0 <= k^2 < 1 violated (k^2 = " + std::to_string(k2) + ")");
  }

  double modulus_squared() const {
    return (h * I3 - c) * (I1 - I2) / ((h * I1 - c) * (I3 - I2));
  }
  EllipticModulus modulus() const { return EllipticModulus::from_squared(modulus_squared()); }
  double frequency() const { return std::sqrt(2.0 * (I2 - I3) * (h * I1 - c) / (I1 * I2 * I3)); }
  double period() const {
    return 4.0 * complete_K(modulus()) * std::sqrt(I1 * I2 * I3) /
           std::sqrt(2.0 * (I2 - I3) * (h * I1 - c));
  }
  double amplitude_x() const { return std::sqrt(2.0 * I1 * (c - h * I3) / (I1 - I3)); }
  double amplitude_y() const { return std::sqrt(2.0 * I2 * (c - h * I3) / (I2 - I3)); }
  double amplitude_z() const { return std::sqrt(2.0 * I3 * (h * I1 - c) / (I1 - I3)); }

  std::map<std::string, double> as_map() const {
    return {{"I1", I1}, {"I2", I2}, {"I3", I3}, {"h", h}, {"c", c}};
  }
};

enum class EulerCase { energyI, momentumI };

/// (A cn(w t), B sn(w t), -C dn(w t)).
inline PeriodicOrbit euler_orbit(const EulerParams& p) {
  p.validate();
  const EllipticModulus m = p.modulus();
  const double w = p.frequency(), A = p.amplitude_x(), B = p.amplitude_y(), C = p.amplitude_z();
  return PeriodicOrbit::closed_form(
      3, p.period(),
      [=]<typename T>(T t) {
        const auto v = jacobi<T>(w * t, m);
        return std::vector<T>{A * v.cn, B * v.sn, -C * v.dn};
      },
      "euler", p.as_map());
}

/// Euler's equations, J1 = F1 - h (energy), J2 = F2 - c (momentum).
/// energyI: I = J1, D = J2; momentumI: I = J2, D = J1.
inline Scenario euler_rigid_body(const EulerParams& p, const ScalarField& rate, EulerCase which) {
  p.validate();
  const auto f = [](double v) { return "(" + expr::format_number(v) + ")"; };
  auto P = [](const std::string& s) { return ScalarField::parse(s, 3); };
  const std::string i1 = f(p.I1), i2 = f(p.I2), i3 = f(p.I3);
  std::vector<ScalarField> base{
      P("(1/" + i3 + "-1/" + i2 + ")*y*z"),
      P("(1/" + i1 + "-1/" + i3 + ")*z*x"),
      P("(1/" + i2 + "-1/" + i1 + ")*x*y"),
  };
  ScalarField J1 = P("0.5*(x^2/" + i1 + "+y^2/" + i2 + "+z^2/" + i3 + ")-" + f(p.h));
  ScalarField J2 = P("0.5*(x^2+y^2+z^2)-" + f(p.c));
  const std::string ellipsoid = "I⁻¹({0}) ellipsoid (x^2/I1+y^2/I2+z^2/I3)/2=h";
  const std::string sphere = "I⁻¹({0}) sphere (x^2+y^2+z^2)/2=c";
  if (which == EulerCase::energyI) {
    return {"euler:energyI",
            DissipativeSystem(3, {J1}, {J2}, {rate}, std::nullopt, base, ellipsoid),
            euler_orbit(p)};
  }
  return {"euler:momentumI",
          DissipativeSystem(3, {J2}, {J1}, {rate}, std::nullopt, base, sphere), euler_orbit(p)};
}

inline const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{"harmonic:zD", "harmonic:planar", "euler:energyI",
                                              "euler:momentumI"};
  return names;
}

/// Scenario by builtin name; Euler parameters are ignored for the oscillator.
inline Scenario builtin_scenario(const std::string& name, const ScalarField& rate,
                                 const EulerParams& params = {}) {
  if (name == "harmonic:zD") return harmonic_oscillator(HarmonicCase::zD, rate);
  if (name == "harmonic:planar") return harmonic_oscillator(HarmonicCase::planar, rate);
  if (name == "euler:energyI") return euler_rigid_body(params, rate, EulerCase::energyI);
  if (name == "euler:momentumI") return euler_rigid_body(params, rate, EulerCase::momentumI);
  throw InputError("builtin", "unknown builtin '" + name + "'");
}

}  // namespace dissipative
