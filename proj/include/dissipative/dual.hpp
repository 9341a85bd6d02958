#pragma once

// Forward-mode dual numbers with a single derivative slot. Nesting
// Dual<Dual<double>> gives exact second directional derivatives, which the
// system module relies on to differentiate fields built from gradients.

#include <cmath>
#include <type_traits>

namespace dissipative {

template <typename T>
struct Dual {
  T value{};
  T deriv{};

  constexpr Dual() = default;
  constexpr Dual(double v) : value(v), deriv(0.0) {}  // NOLINT(implicit)
  constexpr Dual(T v, T d) : value(v), deriv(d) {}

  Dual& operator+=(const Dual& o) {
    value += o.value;
    deriv += o.deriv;
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    value -= o.value;
    deriv -= o.deriv;
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    deriv = deriv * o.value + value * o.deriv;
    value *= o.value;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    T q = value / o.value;
    deriv = (deriv - q * o.deriv) / o.value;
    value = q;
    return *this;
  }
};

template <typename T>
struct is_dual : std::false_type {};
template <typename T>
struct is_dual<Dual<T>> : std::true_type {};

/// Innermost real value of a possibly nested dual.
inline double primal(double x) { return x; }
template <typename T>
double primal(const Dual<T>& x) {
  return primal(x.value);
}

template <typename T>
Dual<T> operator+(Dual<T> a, const Dual<T>& b) { return a += b; }
template <typename T>
Dual<T> operator-(Dual<T> a, const Dual<T>& b) { return a -= b; }
template <typename T>
Dual<T> operator*(Dual<T> a, const Dual<T>& b) { return a *= b; }
template <typename T>
Dual<T> operator/(Dual<T> a, const Dual<T>& b) { return a /= b; }
template <typename T>
Dual<T> operator-(const Dual<T>& a) { return {-a.value, -a.deriv}; }

template <typename T>
Dual<T> operator+(Dual<T> a, double b) { return a += Dual<T>(b); }
template <typename T>
Dual<T> operator+(double a, Dual<T> b) { return b += Dual<T>(a); }
template <typename T>
Dual<T> operator-(Dual<T> a, double b) { return a -= Dual<T>(b); }
template <typename T>
Dual<T> operator-(double a, const Dual<T>& b) { return Dual<T>(a) - b; }
template <typename T>
Dual<T> operator*(Dual<T> a, double b) {
  a.value *= b;
  a.deriv *= b;
  return a;
}
template <typename T>
Dual<T> operator*(double a, Dual<T> b) { return b * a; }
template <typename T>
Dual<T> operator/(Dual<T> a, double b) {
  a.value /= b;
  a.deriv /= b;
  return a;
}
template <typename T>
Dual<T> operator/(double a, const Dual<T>& b) { return Dual<T>(a) / b; }

template <typename T>
bool operator<(const Dual<T>& a, const Dual<T>& b) { return primal(a) < primal(b); }
template <typename T>
bool operator>(const Dual<T>& a, const Dual<T>& b) { return primal(a) > primal(b); }

using std::asin;
using std::cos;
using std::exp;
using std::sin;
using std::sqrt;
using std::tanh;

template <typename T>
Dual<T> sin(const Dual<T>& a) {
  return {sin(a.value), cos(a.value) * a.deriv};
}
template <typename T>
Dual<T> cos(const Dual<T>& a) {
  return {cos(a.value), -sin(a.value) * a.deriv};
}
template <typename T>
Dual<T> exp(const Dual<T>& a) {
  T e = exp(a.value);
  return {e, e * a.deriv};
}
template <typename T>
Dual<T> sqrt(const Dual<T>& a) {
  T s = sqrt(a.value);
  return {s, a.deriv / (2.0 * s)};
}
template <typename T>
Dual<T> tanh(const Dual<T>& a) {
  T th = tanh(a.value);
  return {th, (1.0 - th * th) * a.deriv};
}
template <typename T>
Dual<T> asin(const Dual<T>& a) {
  return {asin(a.value), a.deriv / sqrt(1.0 - a.value * a.value)};
}

/// x^k for integer k by repeated squaring; k < 0 inverts.
template <typename T>
T ipow(const T& x, long k) {
  if (k < 0) return T(1.0) / ipow(x, -k);
  T result(1.0);
  T base = x;
  while (k > 0) {
    if (k & 1) result = result * base;
    base = base * base;
    k >>= 1;
  }
  return result;
}

}  // namespace dissipative
