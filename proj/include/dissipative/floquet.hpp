#pragma once

// Characteristic multipliers of periodic orbits of codimension-one
// dissipative systems. Three routes are provided and cross-checked:
//   - numeric: eigenvalues of the monodromy matrix u(T) of the full
//     variational equation du/dt = DX(gamma(t)) u,
//   - reduced: the (n-1)x(n-1) system dv/dt = K(gamma(t)) v with
//     K = blockdiag(0_k, diag(h_1..h_p)),
//   - analytic: {1 (k+1 times), exp(int h_1), ..., exp(int h_p)}.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dissipative/errors.hpp"
#include "dissipative/field.hpp"
#include "dissipative/ode.hpp"
#include "dissipative/orbit.hpp"
#include "dissipative/system.hpp"

namespace dissipative {

using Complex = std::complex<double>;

namespace detail {

// Similarity scaling by powers of two so row and column norms are comparable.
inline void balance(Eigen::MatrixXd& a) {
  constexpr double radix = 2.0;
  constexpr double sqrdx = radix * radix;
  const Eigen::Index n = a.rows();
  bool done = false;
  while (!done) {
    done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double r = 0.0, c = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j != i) {
          c += std::abs(a(j, i));
          r += std::abs(a(i, j));
        }
      }
      if (c != 0.0 && r != 0.0) {
        double g = r / radix;
        double f = 1.0;
        const double s = c + r;
        while (c < g) {
          f *= radix;
          c *= sqrdx;
        }
        g = r * radix;
        while (c > g) {
          f /= radix;
          c /= sqrdx;
        }
        if ((c + r) / f < 0.95 * s) {
          done = false;
          g = 1.0 / f;
          a.row(i) *= g;
          a.col(i) *= f;
        }
      }
    }
  }
}

// Reduction to upper Hessenberg form by stabilized elementary similarity
// transformations.
inline void hessenberg(Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  for (Eigen::Index m = 1; m < n - 1; ++m) {
    double x = 0.0;
    Eigen::Index piv = m;
    for (Eigen::Index j = m; j < n; ++j) {
      if (std::abs(a(j, m - 1)) > std::abs(x)) {
        x = a(j, m - 1);
        piv = j;
      }
    }
    if (piv != m) {
      a.row(piv).swap(a.row(m));
      a.col(piv).swap(a.col(m));
    }
    if (x != 0.0) {
      for (Eigen::Index i = m + 1; i < n; ++i) {
        double y = a(i, m - 1);
        if (y != 0.0) {
          y /= x;
          a(i, m - 1) = y;
          for (Eigen::Index j = m; j < n; ++j) a(i, j) -= y * a(m, j);
          for (Eigen::Index j = 0; j < n; ++j) a(j, m) += y * a(j, i);
        }
      }
    }
  }
  for (Eigen::Index i = 2; i < n; ++i) {
    for (Eigen::Index j = 0; j < i - 1; ++j) a(i, j) = 0.0;
  }
}

inline double sign_of(double magnitude, double s) {
  return s >= 0.0 ? std::abs(magnitude) : -std::abs(magnitude);
}

// Francis double-shift QR on an upper Hessenberg matrix. Works 1-based on a
// padded copy to keep the index arithmetic of the textbook algorithm.
inline std::vector<Complex> hessenberg_qr(const Eigen::MatrixXd& h, int max_iterations) {
  const int n = static_cast<int>(h.rows());
  std::vector<std::vector<double>> a(n + 1, std::vector<double>(n + 1, 0.0));
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) a[i][j] = h(i - 1, j - 1);
  std::vector<double> wr(n + 1, 0.0), wi(n + 1, 0.0);

  double anorm = 0.0;
  for (int i = 1; i <= n; ++i)
    for (int j = std::max(i - 1, 1); j <= n; ++j) anorm += std::abs(a[i][j]);

  int nn = n;
  double t = 0.0;
  while (nn >= 1) {
    int its = 0;
    int l = 0;
    do {
      for (l = nn; l >= 2; --l) {
        double s = std::abs(a[l - 1][l - 1]) + std::abs(a[l][l]);
        if (s == 0.0) s = anorm;
        if (std::abs(a[l][l - 1]) + s == s) {
          a[l][l - 1] = 0.0;
          break;
        }
      }
      double x = a[nn][nn];
      if (l == nn) {  // one root found
        wr[nn] = x + t;
        wi[nn] = 0.0;
        --nn;
      } else {
        double y = a[nn - 1][nn - 1];
        double w = a[nn][nn - 1] * a[nn - 1][nn];
        if (l == nn - 1) {  // two roots found
          const double p = 0.5 * (y - x);
          const double q = p * p + w;
          double z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + sign_of(z, p);
            wr[nn - 1] = wr[nn] = x + z;
            if (z != 0.0) wr[nn] = x - w / z;
            wi[nn - 1] = wi[nn] = 0.0;
          } else {
            wr[nn - 1] = wr[nn] = x + p;
            wi[nn - 1] = -z;
            wi[nn] = z;
          }
          nn -= 2;
        } else {
          if (its == max_iterations) {
            throw ConvergenceError("QR iteration did not converge after " +
                                   std::to_string(max_iterations) + " iterations");
          }
          if (its == 10 || its == 20) {  // exceptional shift
            t += x;
            for (int i = 1; i <= nn; ++i) a[i][i] -= x;
            const double s = std::abs(a[nn][nn - 1]) + std::abs(a[nn - 1][nn - 2]);
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          int m = nn - 2;
          double p = 0.0, q = 0.0, r = 0.0, z = 0.0;
          for (; m >= l; --m) {
            z = a[m][m];
            r = x - z;
            double s = y - z;
            p = (r * s - w) / a[m + 1][m] + a[m][m + 1];
            q = a[m + 1][m + 1] - z - r - s;
            r = a[m + 2][m + 1];
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::abs(a[m][m - 1]) * (std::abs(q) + std::abs(r));
            const double v =
                std::abs(p) * (std::abs(a[m - 1][m - 1]) + std::abs(z) + std::abs(a[m + 1][m + 1]));
            if (u + v == v) break;
          }
          for (int i = m + 2; i <= nn; ++i) {
            a[i][i - 2] = 0.0;
            if (i != m + 2) a[i][i - 3] = 0.0;
          }
          for (int k = m; k <= nn - 1; ++k) {
            if (k != m) {
              p = a[k][k - 1];
              q = a[k + 1][k - 1];
              r = 0.0;
              if (k != nn - 1) r = a[k + 2][k - 1];
              x = std::abs(p) + std::abs(q) + std::abs(r);
              if (x != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            const double s = sign_of(std::sqrt(p * p + q * q + r * r), p);
            if (s != 0.0) {
              if (k == m) {
                if (l != m) a[k][k - 1] = -a[k][k - 1];
              } else {
                a[k][k - 1] = -s * x;
              }
              p += s;
              x = p / s;
              y = q / s;
              z = r / s;
              q /= p;
              r /= p;
              for (int j = k; j <= nn; ++j) {
                p = a[k][j] + q * a[k + 1][j];
                if (k != nn - 1) {
                  p += r * a[k + 2][j];
                  a[k + 2][j] -= p * z;
                }
                a[k + 1][j] -= p * y;
                a[k][j] -= p * x;
              }
              const int mmin = nn < k + 3 ? nn : k + 3;
              for (int i = l; i <= mmin; ++i) {
                p = x * a[i][k] + y * a[i][k + 1];
                if (k != nn - 1) {
                  p += z * a[i][k + 2];
                  a[i][k + 2] -= p * r;
                }
                a[i][k + 1] -= p * q;
                a[i][k] -= p;
              }
            }
          }
        }
      }
    } while (l < nn - 1);
  }
  std::vector<Complex> out;
  out.reserve(n);
  for (int i = 1; i <= n; ++i) out.emplace_back(wr[i], wi[i]);
  return out;
}

}  // namespace detail

/// Eigenvalues of a real square matrix: balancing, Hessenberg reduction,
/// Francis double-shift QR. Sorted by decreasing modulus, then by real and
/// imaginary part. Throws ConvergenceError if an eigenvalue needs more than
/// 30 iterations.
inline std::vector<Complex> eigenvalues(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw DimensionError("eigenvalues of a non-square matrix");
  if (!m.allFinite()) throw DomainError("eigenvalues of a matrix with non-finite entries");
  if (m.rows() == 0) return {};
  Eigen::MatrixXd a = m;
  detail::balance(a);
  detail::hessenberg(a);
  auto ev = detail::hessenberg_qr(a, 30);
  std::sort(ev.begin(), ev.end(), [](const Complex& x, const Complex& y) {
    if (std::abs(x) != std::abs(y)) return std::abs(x) > std::abs(y);
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
  });
  return ev;
}

/// Tolerances for the variational integration.
struct MonodromyOptions {
  OdeTolerances ode{1e-12, 1e-14};
};

struct MonodromyResult {
  Eigen::MatrixXd matrix;
  Point final_state;  // x(T) of the co-integrated state
  OdeStats stats;
};

/// Integrates x' = X(x), U' = DX(x) U with x(0) = gamma(0), U(0) = I over
/// one period as a single augmented system.
inline MonodromyResult monodromy_with_state(const VectorField& field, const PeriodicOrbit& orbit,
                                            const MonodromyOptions& opt = {}) {
  const int n = field.dimension();
  if (orbit.dimension() != n) throw DimensionError("orbit and field dimensions differ");
  std::vector<double> y(static_cast<std::size_t>(n + n * n), 0.0);
  const Point x0 = orbit.evaluate(0.0);
  std::copy(x0.begin(), x0.end(), y.begin());
  for (int i = 0; i < n; ++i) y[n + i * n + i] = 1.0;  // column-major identity

  OdeRhs rhs = [&](double, std::span<const double> s, std::span<double> ds) {
    auto x = s.first(n);
    const auto f = field(x);
    std::copy(f.begin(), f.end(), ds.begin());
    const Eigen::MatrixXd jac = field.jacobian(x);
    Eigen::Map<const Eigen::MatrixXd> u(s.data() + n, n, n);
    Eigen::Map<Eigen::MatrixXd> du(ds.data() + n, n, n);
    du.noalias() = jac * u;
  };
  MonodromyResult res;
  auto yT = integrate_dopri5(rhs, 0.0, y, orbit.period(), opt.ode, {}, {}, &res.stats);
  res.final_state.assign(yT.begin(), yT.begin() + n);
  res.matrix = Eigen::Map<const Eigen::MatrixXd>(yT.data() + n, n, n);
  return res;
}

inline Eigen::MatrixXd monodromy(const VectorField& field, const PeriodicOrbit& orbit,
                                 const MonodromyOptions& opt = {}) {
  return monodromy_with_state(field, orbit, opt).matrix;
}

inline Eigen::MatrixXd monodromy(const std::vector<ScalarField>& components,
                                 const PeriodicOrbit& orbit, const MonodromyOptions& opt = {}) {
  return monodromy(VectorField::from_components(components), orbit, opt);
}

/// int_0^T div X(gamma(s)) ds by Simpson's rule with exact Jacobians.
inline QuadratureResult divergence_integral(const VectorField& field, const PeriodicOrbit& orbit,
                                            int panels = 2048) {
  return simpson_with_estimate([&](double t) { return field.divergence(orbit.evaluate(t)); }, 0.0,
                               orbit.period(), panels);
}

struct LiouvilleCheck {
  double determinant = 0.0;
  double expected = 0.0;  // exp(int div X)
  double relative_error = 0.0;
};

/// det u(T) against exp(int_0^T div X(gamma)).
inline LiouvilleCheck liouville_check(const VectorField& field, const PeriodicOrbit& orbit,
                                      const Eigen::MatrixXd& monodromy_matrix, int panels = 2048) {
  LiouvilleCheck c;
  c.determinant = monodromy_matrix.determinant();
  c.expected = std::exp(divergence_integral(field, orbit, panels).value);
  c.relative_error = std::abs(c.determinant - c.expected) / std::abs(c.expected);
  return c;
}

enum class ReducedMode { analytic, numeric };

struct ReducedOptions {
  int panels = 512;
  OdeTolerances ode{1e-12, 1e-14};
};

/// Fundamental matrix v(T) of dv/dt = K(gamma(t)) v, v(0) = I, where
/// K = blockdiag(0_k, diag(h_1, ..., h_p)). Analytic mode uses the closed
/// form diag(1_k, exp(int h_i)) with Simpson integrals; numeric mode
/// integrates the matrix ODE along the orbit.
inline Eigen::MatrixXd reduced_monodromy(const DissipativeSystem& sys, const PeriodicOrbit& orbit,
                                         ReducedMode mode, const ReducedOptions& opt = {}) {
  const int k = sys.conserved_count();
  const int p = sys.dissipated_count();
  const int m = k + p;
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(m, m);
  if (p == 0) return v;
  if (mode == ReducedMode::analytic) {
    for (int i = 0; i < p; ++i) {
      v(k + i, k + i) = std::exp(rate_integral(sys.rates()[i], orbit, opt.panels).value);
    }
    return v;
  }
  std::vector<double> y(static_cast<std::size_t>(m * m), 0.0);
  for (int i = 0; i < m; ++i) y[i * m + i] = 1.0;
  OdeRhs rhs = [&](double t, std::span<const double> s, std::span<double> ds) {
    const Point x = orbit.evaluate(t);
    Eigen::Map<const Eigen::MatrixXd> vv(s.data(), m, m);
    Eigen::Map<Eigen::MatrixXd> dv(ds.data(), m, m);
    dv.setZero();
    for (int i = 0; i < p; ++i) dv.row(k + i) = sys.rates()[i](x) * vv.row(k + i);
  };
  auto yT = integrate_dopri5(rhs, 0.0, y, orbit.period(), opt.ode);
  return Eigen::Map<const Eigen::MatrixXd>(yT.data(), m, m);
}

struct MultiplierPair {
  Complex analytic;
  Complex numeric;
  double gap = 0.0;
};

/// Multiplier multisets and their provenance.
struct MultiplierReport {
  int dimension = 0;
  int conserved = 0;
  int dissipated = 0;
  double period = 0.0;
  std::vector<Complex> analytic;
  std::vector<Complex> numeric;  // empty when not requested
  std::vector<Complex> reduced;  // eigenvalues of numeric v(T); empty when not requested
  std::vector<MultiplierPair> pairing;
  std::vector<double> integrals;
  std::vector<double> integral_errors;
  /// Eigenvalues of u(T) within 1e-4 of 1 (numeric runs only).
  int unit_cluster = 0;
  double max_pairing_gap = 0.0;
  std::optional<LiouvilleCheck> liouville;
  PeriodicityReport periodicity;
  RegularityReport regularity;
  std::string manifold;
};

struct MultiplierOptions {
  int panels = 512;
  bool numeric = true;
  int samples = 256;
  double periodicity_tolerance = 1e-7;
  RegularityThresholds thresholds;
  MonodromyOptions monodromy;
  SynthesisOptions synthesis;
  double unit_cluster_radius = 1e-4;
};

/// Greedy matching: repeatedly pair the closest unmatched analytic and
/// numeric values.
inline std::vector<MultiplierPair> pair_multipliers(const std::vector<Complex>& analytic,
                                                    const std::vector<Complex>& numeric) {
  std::vector<MultiplierPair> pairs;
  std::vector<bool> used_a(analytic.size(), false), used_n(numeric.size(), false);
  const std::size_t count = std::min(analytic.size(), numeric.size());
  for (std::size_t step = 0; step < count; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      if (used_a[i]) continue;
      for (std::size_t j = 0; j < numeric.size(); ++j) {
        if (used_n[j]) continue;
        const double g = std::abs(analytic[i] - numeric[j]);
        if (g < best) {
          best = g;
          bi = i;
          bj = j;
        }
      }
    }
    used_a[bi] = used_n[bj] = true;
    pairs.push_back({analytic[bi], numeric[bj], best});
  }
  return pairs;
}

/// Validates the hypotheses (periodicity of gamma under the system's field,
/// membership and independence conditions) and assembles the multipliers
/// {1 (k+1 times), exp(int h_i)}. With options.numeric the monodromy and
/// reduced spectra and their pairing are attached. Throws HypothesisError
/// naming the failed check.
inline MultiplierReport analytic_multipliers(const DissipativeSystem& sys,
                                             const PeriodicOrbit& orbit,
                                             const MultiplierOptions& opt = {}) {
  MultiplierReport rep;
  rep.dimension = sys.dimension();
  rep.conserved = sys.conserved_count();
  rep.dissipated = sys.dissipated_count();
  rep.period = orbit.period();
  rep.manifold = sys.manifold_label();

  const VectorField field = as_vector_field(sys, opt.synthesis);
  rep.periodicity = verify_periodicity(orbit, field, opt.samples, opt.periodicity_tolerance);
  if (!rep.periodicity.closure_ok) {
    throw HypothesisError("closure", "orbit does not close: |gamma(T) - gamma(0)| = " +
                                         std::to_string(rep.periodicity.closure));
  }
  if (!rep.periodicity.residual_ok) {
    throw HypothesisError("ode_residual", "orbit is not a solution of the field: residual " +
                                              std::to_string(rep.periodicity.max_residual));
  }
  rep.regularity = regularity_report(sys, orbit, opt.samples, opt.thresholds, opt.synthesis);
  if (!rep.regularity.pass()) {
    throw HypothesisError(rep.regularity.failures().front(),
                          "regularity hypothesis failed: " + rep.regularity.failures().front());
  }

  for (int i = 0; i <= rep.conserved; ++i) rep.analytic.emplace_back(1.0, 0.0);
  for (const auto& h : sys.rates()) {
    const auto q = rate_integral(h, orbit, opt.panels);
    rep.integrals.push_back(q.value);
    rep.integral_errors.push_back(q.error_estimate);
    rep.analytic.emplace_back(std::exp(q.value), 0.0);
  }

  if (opt.numeric) {
    const auto mono = monodromy_with_state(field, orbit, opt.monodromy);
    rep.numeric = eigenvalues(mono.matrix);
    for (const auto& z : rep.numeric) {
      if (std::abs(z - 1.0) <= opt.unit_cluster_radius) ++rep.unit_cluster;
    }
    rep.pairing = pair_multipliers(rep.analytic, rep.numeric);
    for (const auto& pr : rep.pairing) rep.max_pairing_gap = std::max(rep.max_pairing_gap, pr.gap);
    rep.liouville = liouville_check(field, orbit, mono.matrix);
    ReducedOptions ro;
    ro.panels = opt.panels;
    ro.ode = opt.monodromy.ode;
    rep.reduced = eigenvalues(reduced_monodromy(sys, orbit, ReducedMode::numeric, ro));
  }
  return rep;
}

enum class StabilityOutcome { stable_on_manifold, unstable, inconclusive };

inline const char* to_string(StabilityOutcome o) {
  switch (o) {
    case StabilityOutcome::stable_on_manifold: return "StableOnManifold";
    case StabilityOutcome::unstable: return "Unstable";
    case StabilityOutcome::inconclusive: return "Inconclusive";
  }
  return "?";
}

struct StabilityVerdict {
  StabilityOutcome outcome = StabilityOutcome::inconclusive;
  /// 1-based index of a positive integral (Unstable only).
  int witness_index = 0;
  double witness_integral = 0.0;
  /// All integrals, recorded as the witness of StableOnManifold.
  std::vector<double> negative_integrals;
  std::string manifold;
  std::string reason;
};

/// Integrals must clear this margin before their sign counts.
inline double sign_margin(double error_estimate) {
  return std::max(10.0 * error_estimate, 1e-10);
}

/// Decides stability from the signs of the rate integrals. A positive
/// integral means Unstable regardless of regularity of I; all negative and
/// 0 a regular value of I means StableOnManifold; anything else is
/// Inconclusive.
inline StabilityVerdict classify(const MultiplierReport& report, bool regular_value_I) {
  StabilityVerdict v;
  v.manifold = report.manifold;
  const std::size_t p = report.integrals.size();
  auto margin = [&](std::size_t i) {
    return sign_margin(i < report.integral_errors.size() ? report.integral_errors[i] : 0.0);
  };
  for (std::size_t i = 0; i < p; ++i) {
    if (report.integrals[i] > margin(i)) {
      v.outcome = StabilityOutcome::unstable;
      v.witness_index = static_cast<int>(i) + 1;
      v.witness_integral = report.integrals[i];
      v.reason = "positive rate integral";
      return v;
    }
  }
  if (p == 0) {
    v.reason = "no dissipated directions";
    return v;
  }
  bool all_negative = true;
  for (std::size_t i = 0; i < p; ++i) {
    if (!(report.integrals[i] < -margin(i))) all_negative = false;
  }
  if (!all_negative) {
    v.reason = "rate integral within the sign margin of zero";
    return v;
  }
  if (!regular_value_I) {
    v.reason = "0 is not a regular value of the conserved map";
    return v;
  }
  v.outcome = StabilityOutcome::stable_on_manifold;
  v.negative_integrals = report.integrals;
  v.reason = "all rate integrals negative";
  return v;
}

inline StabilityVerdict classify(const MultiplierReport& report) {
  return classify(report, report.regularity.conserved_regular_ok);
}

}  // namespace dissipative
