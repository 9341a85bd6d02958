#pragma once

// Periodic orbits given in closed form or as uniform sample tables, plus the
// numerical machinery that works along them: periodicity checks, Simpson
// quadrature of rate integrals, trajectory simulation and distance to the
// orbit.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "dissipative/dual.hpp"
#include "dissipative/errors.hpp"
#include "dissipative/expr.hpp"
#include "dissipative/field.hpp"
#include "dissipative/ode.hpp"

namespace dissipative {

class PeriodicOrbit {
 public:
  using RealParam = std::function<std::vector<double>(double)>;
  using DualParam = std::function<std::vector<Dual<double>>(Dual<double>)>;

  /// Closed-form orbit from a generic parameterization `f(T t) -> vector<T>`.
  /// `builtin` and `params` identify it for serialization.
  template <typename F>
  static PeriodicOrbit closed_form(int dimension, double period, F f, std::string builtin = {},
                                   std::map<std::string, double> params = {}) {
    PeriodicOrbit o(dimension, period);
    o.real_ = [f](double t) { return f(t); };
    o.dual_ = [f](Dual<double> t) { return f(t); };
    o.builtin_ = std::move(builtin);
    o.params_ = std::move(params);
    return o;
  }

  /// Orbit from a table of uniformly spaced samples starting at t = 0. The
  /// final time is the period; the final row should repeat the first one.
  static PeriodicOrbit sampled(std::vector<double> times, std::vector<Point> states) {
    if (times.size() != states.size() || times.size() < 5) {
      throw InputError("orbit_table", "orbit table needs at least 5 rows with matching sizes");
    }
    const int n = static_cast<int>(states.front().size());
    if (n < 1) throw InputError("orbit_table", "orbit table has no state columns");
    for (const auto& s : states) {
      if (static_cast<int>(s.size()) != n) {
        throw InputError("orbit_table", "orbit table rows have different lengths");
      }
    }
    if (times.front() != 0.0) throw InputError("orbit_table", "orbit table must start at t = 0");
    const double period = times.back();
    if (!(period > 0.0)) throw InputError("orbit_table", "orbit table period must be positive");
    const double step = period / static_cast<double>(times.size() - 1);
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (std::abs(times[i] - step * static_cast<double>(i)) > 1e-9 * period) {
        throw InputError("orbit_table", "orbit table times are not uniform");
      }
    }
    PeriodicOrbit o(n, period);
    o.samples_ = std::move(states);
    return o;
  }

  int dimension() const noexcept { return n_; }
  double period() const noexcept { return period_; }
  bool is_sampled() const noexcept { return !samples_.empty(); }
  const std::string& builtin() const noexcept { return builtin_; }
  const std::map<std::string, double>& params() const noexcept { return params_; }
  const std::vector<Point>& samples() const noexcept { return samples_; }

  /// Sample spacing of a table orbit (0 for closed forms).
  double grid_step() const noexcept {
    return is_sampled() ? period_ / static_cast<double>(samples_.size() - 1) : 0.0;
  }

  /// gamma(t) with t reduced modulo the period.
  Point evaluate(double t) const {
    double s = std::fmod(t, period_);
    if (s < 0.0) s += period_;
    return raw(s);
  }

  /// The parameterization at t without reduction; for tables, t = T gives
  /// the last row. Used for closure checks.
  Point raw(double t) const {
    if (!is_sampled()) return real_(t);
    if (t == period_) return samples_.back();
    return interpolate(t);
  }

  /// gamma'(t): exact for closed forms; fourth-order centred differences
  /// of the interpolant for tables.
  Point velocity(double t) const {
    if (!is_sampled()) {
      auto d = dual_(Dual<double>(t, 1.0));
      Point v(d.size());
      for (std::size_t i = 0; i < d.size(); ++i) v[i] = d[i].deriv;
      return v;
    }
    const double h = grid_step();
    auto fp1 = evaluate(t + h), fm1 = evaluate(t - h);
    auto fp2 = evaluate(t + 2 * h), fm2 = evaluate(t - 2 * h);
    Point v(n_);
    for (int i = 0; i < n_; ++i) {
      v[i] = (-fp2[i] + 8.0 * fp1[i] - 8.0 * fm1[i] + fm2[i]) / (12.0 * h);
    }
    return v;
  }

 private:
  PeriodicOrbit(int n, double period) : n_(n), period_(period) {
    if (!(period > 0.0) || !std::isfinite(period)) {
      throw InputError("period", "orbit period must be positive and finite");
    }
  }

  // Periodic four-point Lagrange interpolation over the distinct samples.
  Point interpolate(double t) const {
    const std::size_t m = samples_.size() - 1;
    const double h = period_ / static_cast<double>(m);
    double u = t / h;
    long base = static_cast<long>(std::floor(u));
    const double s = u - static_cast<double>(base);
    auto row = [&](long k) -> const Point& {
      long r = k % static_cast<long>(m);
      if (r < 0) r += static_cast<long>(m);
      return samples_[static_cast<std::size_t>(r)];
    };
    const double w0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
    const double w1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
    const double w2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
    const double w3 = (s + 1.0) * s * (s - 1.0) / 6.0;
    const Point& p0 = row(base - 1);
    const Point& p1 = row(base);
    const Point& p2 = row(base + 1);
    const Point& p3 = row(base + 2);
    Point out(n_);
    for (int i = 0; i < n_; ++i) out[i] = w0 * p0[i] + w1 * p1[i] + w2 * p2[i] + w3 * p3[i];
    return out;
  }

  int n_;
  double period_;
  RealParam real_;
  DualParam dual_;
  std::vector<Point> samples_;
  std::string builtin_;
  std::map<std::string, double> params_;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Point> states;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
};

struct PeriodicityReport {
  double closure = 0.0;       // |gamma(T) - gamma(0)|
  double max_residual = 0.0;  // max |gamma'(t) - X(gamma(t))|
  double worst_time = 0.0;
  double tolerance = 0.0;
  bool closure_ok = false;
  bool residual_ok = false;
  bool pass() const noexcept { return closure_ok && residual_ok; }
};

/// Checks closure and that gamma solves x' = X(x) at m sample times.
/// Table orbits are checked at grid points only.
inline PeriodicityReport verify_periodicity(const PeriodicOrbit& orbit, const VectorField& field,
                                            int samples, double tol) {
  if (samples < 8) throw InputError("samples", "periodicity check needs at least 8 samples");
  if (field.dimension() != orbit.dimension()) {
    throw DimensionError("orbit and field dimensions differ");
  }
  PeriodicityReport rep;
  rep.tolerance = tol;
  rep.closure = distance(orbit.raw(orbit.period()), orbit.raw(0.0));
  for (int j = 0; j < samples; ++j) {
    double t = orbit.period() * j / samples;
    if (orbit.is_sampled()) {
      const double h = orbit.grid_step();
      t = h * std::round(t / h);
    }
    const Point x = orbit.evaluate(t);
    const Point v = orbit.velocity(t);
    const auto f = field(x);
    const double r = distance(v, f);
    if (r > rep.max_residual || j == 0) {
      rep.max_residual = r;
      rep.worst_time = t;
    }
  }
  rep.closure_ok = rep.closure <= tol;
  rep.residual_ok = rep.max_residual <= tol;
  return rep;
}

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

namespace detail {

template <typename G>
double simpson(const G& g, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double s = g(a) + g(b);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * g(a + h * i);
  return s * h / 3.0;
}

}  // namespace detail

/// Composite Simpson rule for a function of time on [a, b]; the error
/// estimate is the Richardson difference against half (or double) the panels.
template <typename G>
QuadratureResult simpson_with_estimate(const G& g, double a, double b, int panels) {
  if (panels < 16 || panels % 2 != 0) {
    throw InputError("panels", "Simpson quadrature needs an even panel count >= 16");
  }
  QuadratureResult r;
  r.value = detail::simpson(g, a, b, panels);
  const double other = (panels % 4 == 0) ? detail::simpson(g, a, b, panels / 2)
                                          : detail::simpson(g, a, b, 2 * panels);
  r.error_estimate = std::abs(r.value - other) / 15.0;
  return r;
}

/// int_0^T h(gamma(s)) ds
inline QuadratureResult rate_integral(const ScalarField& h, const PeriodicOrbit& orbit,
                                      int panels) {
  return simpson_with_estimate(
      [&](double t) {
        const Point x = orbit.evaluate(t);
        return h(x);
      },
      0.0, orbit.period(), panels);
}

/// Adaptive Dormand-Prince integration of x' = X(x). With an empty output
/// grid every accepted step is recorded; otherwise the states are dense
/// output at the requested times.
inline Trajectory simulate(const VectorField& field, const Point& x0, double t_end,
                           const OdeTolerances& tol = {},
                           std::span<const double> output_times = {}) {
  if (!(t_end > 0.0)) throw InputError("t_end", "simulation end time must be positive");
  if (static_cast<int>(x0.size()) != field.dimension()) {
    throw DimensionError("initial state has the wrong dimension");
  }
  for (double v : x0) {
    if (!std::isfinite(v)) throw IntegrationError("non-finite initial state", 0.0);
  }
  Trajectory traj;
  OdeStats stats;
  OdeRhs rhs = [&](double, std::span<const double> y, std::span<double> dy) {
    auto f = field(y);
    std::copy(f.begin(), f.end(), dy.begin());
  };
  auto record = [&](double t, std::span<const double> y) {
    traj.times.push_back(t);
    traj.states.emplace_back(y.begin(), y.end());
  };
  if (!output_times.empty()) {
    integrate_dopri5(rhs, 0.0, x0, t_end, tol, output_times, record, &stats);
  } else {
    record(0.0, x0);
    integrate_dopri5(rhs, 0.0, x0, t_end, tol, {}, {}, &stats, record);
  }
  traj.accepted_steps = stats.accepted;
  traj.rejected_steps = stats.rejected;
  return traj;
}

/// min_t |x - gamma(t)| by uniform sampling followed by a golden-section
/// refinement around the best sample.
inline double distance_to_orbit(std::span<const double> x, const PeriodicOrbit& orbit,
                                int samples = 256) {
  if (samples < 32) throw InputError("samples", "distance_to_orbit needs at least 32 samples");
  const double T = orbit.period();
  const double dt = T / samples;
  auto dist_at = [&](double t) { return distance(x, orbit.evaluate(t)); };
  double best_t = 0.0;
  double best = dist_at(0.0);
  for (int j = 1; j < samples; ++j) {
    const double d = dist_at(dt * j);
    if (d < best) {
      best = d;
      best_t = dt * j;
    }
  }
  constexpr double inv_phi = 0.6180339887498949;
  double a = best_t - dt, b = best_t + dt;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = dist_at(c), fd = dist_at(d);
  for (int it = 0; it < 80 && (b - a) > 1e-14 * std::max(1.0, T); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = dist_at(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = dist_at(d);
    }
  }
  return std::min({best, fc, fd});
}

}  // namespace dissipative
