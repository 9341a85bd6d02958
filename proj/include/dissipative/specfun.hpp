#pragma once

// Complete elliptic integral of the first kind and the Jacobi elliptic
// functions, both through the arithmetic-geometric mean.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "dissipative/dual.hpp"
#include "dissipative/errors.hpp"

namespace dissipative {

/// Elliptic modulus k with 0 <= k < 1.
class EllipticModulus {
 public:
  /// Largest admissible k^2 after clamping.
  static constexpr double kMaxSquared = 1.0 - 1e-12;

  explicit EllipticModulus(double k) : k_(k) {
    if (!(k >= 0.0 && k < 1.0)) {
      throw DomainError("elliptic modulus must satisfy 0 <= k < 1, got " + std::to_string(k));
    }
  }

  /// Builds the modulus from k^2 as produced by closed-form parameter
  /// formulas. Values within 1e-12 of the admissible range are clamped
  /// into [0, 1 - 1e-12]; clamped() reports whether that moved the value
  /// by more than 1e-12.
  static EllipticModulus from_squared(double k2) {
    if (!std::isfinite(k2) || k2 < -1e-12 || k2 >= 1.0) {
      throw DomainError("elliptic parameter k^2 = " + std::to_string(k2) +
                        " is outside [0, 1)");
    }
    double clamped = std::min(std::max(k2, 0.0), kMaxSquared);
    EllipticModulus m(std::sqrt(clamped));
    m.clamped_ = std::abs(clamped - k2) > 1e-12;
    return m;
  }

  double k() const noexcept { return k_; }
  double squared() const noexcept { return k_ * k_; }
  double complementary() const noexcept { return std::sqrt((1.0 - k_) * (1.0 + k_)); }
  bool clamped() const noexcept { return clamped_; }

 private:
  double k_;
  bool clamped_ = false;
};

struct JacobiTriple {
  double sn;
  double cn;
  double dn;
};

template <typename T>
struct JacobiValues {
  T sn;
  T cn;
  T dn;
};

inline double agm(double a, double b) {
  for (int it = 0; it < 64 && std::abs(a - b) > 1e-16 * a; ++it) {
    const double next = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = next;
  }
  return a;
}

/// K(k) = pi / (2 agm(1, k')).
inline double complete_K(const EllipticModulus& m) {
  return std::numbers::pi / (2.0 * agm(1.0, m.complementary()));
}

inline double complete_K(double k) { return complete_K(EllipticModulus(k)); }

/// sn, cn, dn by descending Landen transformation with backward recurrence
/// for the amplitude. Generic in the argument so duals pass through.
template <typename T>
JacobiValues<T> jacobi(const T& u, const EllipticModulus& m) {
  constexpr int kMaxLevels = 32;
  double a[kMaxLevels + 1];
  double c[kMaxLevels + 1];
  a[0] = 1.0;
  double b = m.complementary();
  c[0] = m.k();
  int levels = 0;
  while (std::abs(c[levels]) > 1e-16 * a[levels] && levels < kMaxLevels) {
    const double an = a[levels];
    a[levels + 1] = 0.5 * (an + b);
    c[levels + 1] = 0.5 * (an - b);
    b = std::sqrt(an * b);
    ++levels;
  }
  T phi = std::ldexp(a[levels], levels) * u;
  for (int n = levels; n > 0; --n) {
    phi = 0.5 * (phi + asin((c[n] / a[n]) * sin(phi)));
  }
  T sn = sin(phi);
  T cn = cos(phi);
  T dn = sqrt(1.0 - m.squared() * sn * sn);
  return {sn, cn, dn};
}

inline JacobiTriple jacobi(double u, double k) {
  auto v = jacobi<double>(u, EllipticModulus(k));
  return {v.sn, v.cn, v.dn};
}

}  // namespace dissipative
