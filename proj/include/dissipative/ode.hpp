#pragma once

// Dormand-Prince 5(4) with PI step-size control and the standard fourth
// order continuous extension for dense output.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "dissipative/errors.hpp"

namespace dissipative {

struct OdeTolerances {
  double relative = 1e-10;
  double absolute = 1e-12;
  /// 0 selects the starting step automatically.
  double initial_step = 0.0;
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 5'000'000;
};

struct OdeStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;
};

using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

/// Called with (t, y) at each requested output time (or accepted step), in order.
using OdeObserver = std::function<void(double t, std::span<const double> y)>;

namespace detail::dopri {

inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                        a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                        a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                        a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                        e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0,
                        d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

}  // namespace detail::dopri

/// Integrates y' = f(t, y) from t0 to t1 > t0, returns y(t1). Output times
/// must be ascending and inside [t0, t1]; the observer sees each exactly once.
inline std::vector<double> integrate_dopri5(const OdeRhs& f, double t0, std::vector<double> y,
                                            double t1, const OdeTolerances& tol,
                                            std::span<const double> output_times = {},
                                            const OdeObserver& observer = {},
                                            OdeStats* stats = nullptr,
                                            const OdeObserver& on_step = {}) {
  using namespace detail::dopri;
  if (!(t1 > t0)) throw IntegrationError("integration interval must have t1 > t0", t0);
  const std::size_t n = y.size();
  constexpr double uround = 2.3e-16;
  constexpr double safe = 0.9, beta = 0.04, expo1 = 0.2 - beta * 0.75;
  constexpr double facc1 = 1.0 / 0.2, facc2 = 1.0 / 10.0;

  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), y1(n), ystage(n);
  std::vector<double> r1(n), r2(n), r3(n), r4(n), r5(n);
  OdeStats local;
  OdeStats& st = stats ? *stats : local;

  auto scale = [&](double a, double b) {
    return tol.absolute + tol.relative * std::max(std::abs(a), std::abs(b));
  };

  double t = t0;
  f(t, y, k1);
  ++st.evaluations;

  std::size_t next_out = 0;
  while (next_out < output_times.size() && output_times[next_out] <= t0) {
    if (observer) observer(output_times[next_out], y);
    ++next_out;
  }

  double h = tol.initial_step;
  if (h <= 0.0) {
    // Hairer-Wanner starting step heuristic
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sk = scale(y[i], y[i]);
      dnf += (k1[i] / sk) * (k1[i] / sk);
      dny += (y[i] / sk) * (y[i] / sk);
    }
    h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min(h, t1 - t0);
    for (std::size_t i = 0; i < n; ++i) ystage[i] = y[i] + h * k1[i];
    f(t + h, ystage, k2);
    ++st.evaluations;
    double der2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sk = scale(y[i], y[i]);
      der2 += ((k2[i] - k1[i]) / sk) * ((k2[i] - k1[i]) / sk);
    }
    der2 = std::sqrt(der2 / std::max<std::size_t>(n, 1)) / h;
    const double der12 = std::max(std::abs(der2), std::sqrt(dnf / std::max<std::size_t>(n, 1)));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3)
                                     : std::pow(0.01 / der12, 0.2);
    h = std::min({100.0 * std::abs(h), h1, t1 - t0});
  }
  h = std::min(h, tol.max_step);

  double facold = 1e-4;
  bool last = false;
  bool reject = false;

  for (std::size_t step = 0;; ++step) {
    if (step >= tol.max_steps) {
      throw IntegrationError("step budget exhausted at t = " + std::to_string(t), t);
    }
    if (0.1 * std::abs(h) <= std::abs(t) * uround || h < 1e-300) {
      throw IntegrationError("step size underflow at t = " + std::to_string(t), t);
    }
    if (t + 1.01 * h - t1 > 0.0) {
      h = t1 - t;
      last = true;
    }

    for (std::size_t i = 0; i < n; ++i) ystage[i] = y[i] + h * a21 * k1[i];
    f(t + c2 * h, ystage, k2);
    for (std::size_t i = 0; i < n; ++i) ystage[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    f(t + c3 * h, ystage, k3);
    for (std::size_t i = 0; i < n; ++i)
      ystage[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    f(t + c4 * h, ystage, k4);
    for (std::size_t i = 0; i < n; ++i)
      ystage[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    f(t + c5 * h, ystage, k5);
    for (std::size_t i = 0; i < n; ++i)
      ystage[i] =
          y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    const double tph = t + h;
    f(tph, ystage, k6);
    for (std::size_t i = 0; i < n; ++i)
      y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    f(tph, y1, k7);
    st.evaluations += 6;

    double err = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(y1[i])) finite = false;
      const double ei =
          h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sk = scale(y[i], y1[i]);
      err += (ei / sk) * (ei / sk);
    }
    if (!finite || !std::isfinite(err)) {
      // retry with a much smaller step; persistent blow-up ends in underflow
      h *= 0.1;
      last = false;
      reject = true;
      ++st.rejected;
      continue;
    }
    err = std::sqrt(err / std::max<std::size_t>(n, 1));

    const double fac11 = std::pow(err, expo1);
    double fac = fac11 / std::pow(facold, beta);
    fac = std::max(facc2, std::min(facc1, fac / safe));
    double hnew = h / fac;

    if (err <= 1.0) {
      facold = std::max(err, 1e-4);
      ++st.accepted;

      if (next_out < output_times.size() && output_times[next_out] <= tph) {
        for (std::size_t i = 0; i < n; ++i) {
          const double ydiff = y1[i] - y[i];
          const double bspl = h * k1[i] - ydiff;
          r1[i] = y[i];
          r2[i] = ydiff;
          r3[i] = bspl;
          r4[i] = ydiff - h * k7[i] - bspl;
          r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                       d7 * k7[i]);
        }
        std::vector<double> yout(n);
        while (next_out < output_times.size() && output_times[next_out] <= tph) {
          const double theta = (output_times[next_out] - t) / h;
          const double theta1 = 1.0 - theta;
          for (std::size_t i = 0; i < n; ++i) {
            yout[i] = r1[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i])));
          }
          if (observer) observer(output_times[next_out], last && theta == 1.0 ? y1 : yout);
          ++next_out;
        }
      }

      std::swap(k1, k7);
      std::swap(y, y1);
      t = last ? t1 : tph;
      if (on_step) on_step(t, y);
      if (last) break;
      if (std::abs(hnew) > tol.max_step) hnew = tol.max_step;
      if (reject) hnew = std::min(std::abs(hnew), std::abs(h));
      reject = false;
    } else {
      hnew = h / std::min(facc1, fac11 / safe);
      reject = true;
      last = false;
      ++st.rejected;
    }
    h = hnew;
  }
  while (next_out < output_times.size()) {
    if (observer) observer(output_times[next_out], y);
    ++next_out;
  }
  return y;
}

}  // namespace dissipative
