#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dissipative/dual.hpp"
#include "dissipative/errors.hpp"
#include "dissipative/expr.hpp"

namespace dissipative {

using Point = std::vector<double>;

/// A vector field on R^n that can be evaluated on doubles and on dual
/// numbers, so its Jacobian is exact.
class VectorField {
 public:
  using RealFn = std::function<std::vector<double>(std::span<const double>)>;
  using DualFn = std::function<std::vector<Dual<double>>(std::span<const Dual<double>>)>;

  VectorField(int dimension, RealFn real, DualFn dual)
      : n_(dimension), real_(std::move(real)), dual_(std::move(dual)) {}

  /// Wraps a generic callable `f(std::span<const T>) -> std::vector<T>`.
  template <typename F>
  static VectorField generic(int dimension, F f) {
    return VectorField(
        dimension, [f](std::span<const double> x) { return f(x); },
        [f](std::span<const Dual<double>> x) { return f(x); });
  }

  static VectorField from_components(std::vector<ScalarField> components) {
    const int n = static_cast<int>(components.size());
    for (const auto& c : components) {
      if (c.arity() != n) {
        throw DimensionError("vector field component of arity " + std::to_string(c.arity()) +
                             " in a field of dimension " + std::to_string(n));
      }
    }
    return generic(n, [components]<typename T>(std::span<const T> x) {
      std::vector<T> out;
      out.reserve(components.size());
      for (const auto& c : components) out.push_back(c.template evaluate<T>(x));
      return out;
    });
  }

  int dimension() const noexcept { return n_; }

  std::vector<double> operator()(std::span<const double> x) const {
    check(x.size());
    return real_(x);
  }

  std::vector<Dual<double>> operator()(std::span<const Dual<double>> x) const {
    check(x.size());
    return dual_(x);
  }

  /// J(i, j) = d f_i / d x_j, one dual pass per column.
  Eigen::MatrixXd jacobian(std::span<const double> x) const {
    check(x.size());
    std::vector<Dual<double>> seed(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) seed[i] = Dual<double>(x[i], 0.0);
    Eigen::MatrixXd jac(n_, n_);
    for (int j = 0; j < n_; ++j) {
      seed[j].deriv = 1.0;
      auto col = dual_(seed);
      for (int i = 0; i < n_; ++i) jac(i, j) = col[i].deriv;
      seed[j].deriv = 0.0;
    }
    return jac;
  }

  double divergence(std::span<const double> x) const { return jacobian(x).trace(); }

 private:
  void check(std::size_t size) const {
    if (static_cast<int>(size) != n_) {
      throw DimensionError("vector field of dimension " + std::to_string(n_) +
                           " evaluated at a point of dimension " + std::to_string(size));
    }
  }

  int n_;
  RealFn real_;
  DualFn dual_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace dissipative
