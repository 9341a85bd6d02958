#pragma once

// Codimension-one dissipative systems: n - 1 functions split into k
// conserved quantities I_l and p dissipated quantities D_i with rates h_i,
// L_X I_l = 0 and L_X D_i = h_i D_i. The control field
//
//   X0 = |W|^-2 sum_i (-1)^(n-i) h_i D_i Theta_i,
//   W  = grad D_1 ^ ... ^ grad D_p ^ grad I_1 ^ ... ^ grad I_k,
//   Theta_i = *[ (^_{j != i} grad D_j) ^ (^_l grad I_l) ^ *W ],
//
// realises the prescribed rates, and *W spans the fields that leave every
// function invariant.

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dissipative/dual.hpp"
#include "dissipative/errors.hpp"
#include "dissipative/exterior.hpp"
#include "dissipative/expr.hpp"
#include "dissipative/field.hpp"
#include "dissipative/orbit.hpp"

namespace dissipative {

class DissipativeSystem {
 public:
  /// Throws InputError with reason "codimension" unless k + p == n - 1.
  DissipativeSystem(int dimension, std::vector<ScalarField> conserved,
                    std::vector<ScalarField> dissipated, std::vector<ScalarField> rates,
                    std::optional<ScalarField> rescale = std::nullopt,
                    std::optional<std::vector<ScalarField>> base_field = std::nullopt,
                    std::string manifold_label = {})
      : n_(dimension),
        conserved_(std::move(conserved)),
        dissipated_(std::move(dissipated)),
        rates_(std::move(rates)),
        rescale_(std::move(rescale)),
        base_(std::move(base_field)),
        manifold_label_(std::move(manifold_label)) {
    if (n_ < 2 || n_ > kMaxExteriorDim) {
      throw InputError("dimension", "system dimension must lie in [2, " +
                                        std::to_string(kMaxExteriorDim) + "]");
    }
    const int k = static_cast<int>(conserved_.size());
    const int p = static_cast<int>(dissipated_.size());
    if (k + p != n_ - 1) {
      throw InputError("codimension", "expected k + p = n - 1 = " + std::to_string(n_ - 1) +
                                          ", got k = " + std::to_string(k) +
                                          ", p = " + std::to_string(p));
    }
    if (rates_.size() != dissipated_.size()) {
      throw InputError("rates", "need one rate per dissipated function");
    }
    auto check = [&](const ScalarField& f, const char* what) {
      if (f.arity() != n_) {
        throw InputError("arity", std::string(what) + " has arity " +
                                      std::to_string(f.arity()) + ", expected " +
                                      std::to_string(n_));
      }
    };
    for (const auto& f : conserved_) check(f, "conserved function");
    for (const auto& f : dissipated_) check(f, "dissipated function");
    for (const auto& f : rates_) check(f, "rate");
    if (rescale_) check(*rescale_, "rescaling function");
    if (base_) {
      if (static_cast<int>(base_->size()) != n_) {
        throw InputError("base_field", "base field needs " + std::to_string(n_) + " components");
      }
      for (const auto& f : *base_) check(f, "base field component");
    }
  }

  int dimension() const noexcept { return n_; }
  int conserved_count() const noexcept { return static_cast<int>(conserved_.size()); }
  int dissipated_count() const noexcept { return static_cast<int>(dissipated_.size()); }
  const std::vector<ScalarField>& conserved() const noexcept { return conserved_; }
  const std::vector<ScalarField>& dissipated() const noexcept { return dissipated_; }
  const std::vector<ScalarField>& rates() const noexcept { return rates_; }
  const std::optional<ScalarField>& rescale() const noexcept { return rescale_; }
  const std::optional<std::vector<ScalarField>>& base_field() const noexcept { return base_; }
  bool perturbation_mode() const noexcept { return base_.has_value(); }

  /// Human-readable description of I^-1({0}).
  std::string manifold_label() const {
    if (!manifold_label_.empty()) return manifold_label_;
    std::string s = "I^-1({0}) for I = (";
    for (std::size_t l = 0; l < conserved_.size(); ++l) {
      if (l) s += ", ";
      s += conserved_[l].source();
    }
    return s + ")";
  }

  /// Same data with the rates replaced.
  DissipativeSystem with_rates(std::vector<ScalarField> rates) const {
    return DissipativeSystem(n_, conserved_, dissipated_, std::move(rates), rescale_, base_,
                             manifold_label_);
  }

 private:
  int n_;
  std::vector<ScalarField> conserved_;
  std::vector<ScalarField> dissipated_;
  std::vector<ScalarField> rates_;
  std::optional<ScalarField> rescale_;
  std::optional<std::vector<ScalarField>> base_;
  std::string manifold_label_;
};

struct SynthesisOptions {
  /// Threshold on |W|^2 below which the control field is reported singular.
  double singular_epsilon = 1e-12;
  Orientation orientation = Orientation::positive;
};

namespace detail {

template <typename T>
struct GradientData {
  std::vector<std::vector<T>> dissipated;  // grad D_1 .. grad D_p
  std::vector<std::vector<T>> conserved;   // grad I_1 .. grad I_k
};

template <typename T>
GradientData<T> gradients(const DissipativeSystem& sys, std::span<const T> x) {
  if (static_cast<int>(x.size()) != sys.dimension()) {
    throw DimensionError("point has dimension " + std::to_string(x.size()) +
                         ", system has dimension " + std::to_string(sys.dimension()));
  }
  GradientData<T> g;
  for (const auto& d : sys.dissipated()) g.dissipated.push_back(d.template gradient<T>(x));
  for (const auto& c : sys.conserved()) g.conserved.push_back(c.template gradient<T>(x));
  return g;
}

// grad D_j (j != skip) followed by grad I_l, as a wedge.
template <typename T>
MultiVector<T> gradient_wedge(int n, const GradientData<T>& g, int skip) {
  MultiVector<T> acc = MultiVector<T>::scalar(n, T(1.0));
  for (std::size_t j = 0; j < g.dissipated.size(); ++j) {
    if (static_cast<int>(j) == skip) continue;
    acc = wedge(acc, MultiVector<T>::vector(g.dissipated[j]));
  }
  for (const auto& gi : g.conserved) acc = wedge(acc, MultiVector<T>::vector(gi));
  return acc;
}

template <typename T>
std::vector<T> theta_from(int n, const GradientData<T>& g, const MultiVector<T>& star_w,
                          int i, Orientation o) {
  MultiVector<T> inner_wedge = wedge(gradient_wedge(n, g, i), star_w);
  return to_vector(hodge_star(inner_wedge, o));
}

}  // namespace detail

/// *(grad D_1 ^ ... ^ grad D_p ^ grad I_1 ^ ... ^ grad I_k) at x.
template <typename T>
std::vector<T> homogeneous_field(const DissipativeSystem& sys, std::span<const T> x,
                                 const SynthesisOptions& opt = {}) {
  auto g = detail::gradients(sys, x);
  return to_vector(hodge_star(detail::gradient_wedge(sys.dimension(), g, -1), opt.orientation));
}

inline std::vector<double> homogeneous_field(const DissipativeSystem& sys,
                                             std::span<const double> x,
                                             const SynthesisOptions& opt = {}) {
  return homogeneous_field<double>(sys, x, opt);
}

/// Theta_i at x for a 1-based index i in [1, p].
template <typename T>
std::vector<T> theta(const DissipativeSystem& sys, int i, std::span<const T> x,
                     const SynthesisOptions& opt = {}) {
  if (i < 1 || i > sys.dissipated_count()) {
    throw InputError("index", "theta index " + std::to_string(i) + " outside [1, " +
                                  std::to_string(sys.dissipated_count()) + "]");
  }
  auto g = detail::gradients(sys, x);
  const int n = sys.dimension();
  auto star_w = hodge_star(detail::gradient_wedge(n, g, -1), opt.orientation);
  return detail::theta_from(n, g, star_w, i - 1, opt.orientation);
}

inline std::vector<double> theta(const DissipativeSystem& sys, int i, std::span<const double> x,
                                 const SynthesisOptions& opt = {}) {
  return theta<double>(sys, i, x, opt);
}

/// The control field X0 at x. Throws SingularPoint when |W|^2 is at or
/// below the singular epsilon.
template <typename T>
std::vector<T> control_field(const DissipativeSystem& sys, std::span<const T> x,
                             const SynthesisOptions& opt = {}) {
  const int n = sys.dimension();
  const int p = sys.dissipated_count();
  if (static_cast<int>(x.size()) != n) {
    throw DimensionError("point has the wrong dimension for this system");
  }
  std::vector<T> out(n, T(0.0));
  if (p == 0) return out;
  auto g = detail::gradients(sys, x);
  const MultiVector<T> w = detail::gradient_wedge(n, g, -1);
  const T norm2 = norm_squared(w);
  if (!(primal(norm2) > opt.singular_epsilon)) {
    throw SingularPoint("gradient wedge degenerates (|W|^2 = " +
                        std::to_string(primal(norm2)) + ")");
  }
  const MultiVector<T> star_w = hodge_star(w, opt.orientation);
  for (int i = 1; i <= p; ++i) {
    const T h = sys.rates()[i - 1].template evaluate<T>(x);
    const T d = sys.dissipated()[i - 1].template evaluate<T>(x);
    const double sign = ((n - i) % 2 == 0) ? 1.0 : -1.0;
    const T coef = sign * h * d / norm2;
    const auto th = detail::theta_from(n, g, star_w, i - 1, opt.orientation);
    for (int c = 0; c < n; ++c) out[c] += coef * th[c];
  }
  return out;
}

inline std::vector<double> control_field(const DissipativeSystem& sys, std::span<const double> x,
                                         const SynthesisOptions& opt = {}) {
  return control_field<double>(sys, x, opt);
}

/// Synthesis mode: X0 + nu * homogeneous field. Perturbation mode (a base
/// field is present): base + X0.
template <typename T>
std::vector<T> full_field(const DissipativeSystem& sys, std::span<const T> x,
                          const SynthesisOptions& opt = {}) {
  std::vector<T> out = control_field<T>(sys, x, opt);
  if (sys.base_field()) {
    const auto& base = *sys.base_field();
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += base[c].template evaluate<T>(x);
  } else if (sys.rescale()) {
    const T nu = sys.rescale()->template evaluate<T>(x);
    const auto hom = homogeneous_field<T>(sys, x, opt);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += nu * hom[c];
  }
  return out;
}

inline std::vector<double> full_field(const DissipativeSystem& sys, std::span<const double> x,
                                      const SynthesisOptions& opt = {}) {
  return full_field<double>(sys, x, opt);
}

/// full_field wrapped as a VectorField with an exact Jacobian.
inline VectorField as_vector_field(const DissipativeSystem& sys,
                                   const SynthesisOptions& opt = {}) {
  return VectorField::generic(sys.dimension(), [sys, opt]<typename T>(std::span<const T> x) {
    return full_field<T>(sys, x, opt);
  });
}

/// The base field alone (perturbation mode only).
inline VectorField base_vector_field(const DissipativeSystem& sys) {
  if (!sys.base_field()) throw InputError("base_field", "system has no base field");
  return VectorField::from_components(*sys.base_field());
}

/// (<X, grad I_1>, ..., <X, grad I_k>, <X, grad D_1> - h_1 D_1, ...) at x.
inline std::vector<double> lie_residuals(const VectorField& field, const DissipativeSystem& sys,
                                         std::span<const double> x) {
  const auto f = field(x);
  std::vector<double> out;
  for (const auto& c : sys.conserved()) out.push_back(dot(f, c.gradient(x)));
  for (int i = 0; i < sys.dissipated_count(); ++i) {
    const auto& d = sys.dissipated()[i];
    out.push_back(dot(f, d.gradient(x)) - sys.rates()[i](x) * d(x));
  }
  return out;
}

enum class RateKind { stabilizing, destabilizing };

/// -(psi^2 + c) for stabilizing, psi^2 + c for destabilizing; c > 0.
inline ScalarField rate_template(RateKind kind, const ScalarField& psi, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw InputError("rate_template", "rate template constant c must be positive");
  }
  std::string body = "(" + psi.print() + ")^2+" + expr::format_number(c);
  if (kind == RateKind::stabilizing) body = "-(" + body + ")";
  return ScalarField::parse(body, psi.arity());
}

struct RegularityThresholds {
  double membership = 1e-8;    // max |I_l|, |D_i| on the orbit
  double independence = 1e-8;  // smallest singular value, gradients + X
  double regular_value = 1e-8; // smallest singular value, gradients only
};

struct RegularityReport {
  double max_membership = 0.0;
  double min_independence = 0.0;
  double min_regular_value = 0.0;
  /// Smallest singular value of the conserved gradients alone (0 in R^k
  /// regular for I), +inf when k = 0.
  double min_conserved_regular = 0.0;
  double worst_independence_time = 0.0;
  bool membership_ok = false;
  bool independence_ok = false;
  bool regular_value_ok = false;
  bool conserved_regular_ok = false;
  RegularityThresholds thresholds;

  bool pass() const noexcept { return membership_ok && independence_ok && regular_value_ok; }
  /// Names of failed checks: "membership", "independence", "regular_value".
  std::vector<std::string> failures() const {
    std::vector<std::string> f;
    if (!membership_ok) f.emplace_back("membership");
    if (!independence_ok) f.emplace_back("independence");
    if (!regular_value_ok) f.emplace_back("regular_value");
    return f;
  }
};

namespace detail {

inline double smallest_singular_value(const std::vector<std::vector<double>>& rows, int n) {
  if (rows.empty()) return std::numeric_limits<double>::infinity();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), n);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int c = 0; c < n; ++c) m(static_cast<Eigen::Index>(r), c) = rows[r][c];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  // fewer singular values than rows means rank deficiency
  if (s.size() < static_cast<Eigen::Index>(rows.size())) return 0.0;
  return s(s.size() - 1);
}

}  // namespace detail

/// Samples the orbit at m points and checks that it lies in ID^-1({0}),
/// that grad I, grad D, X are independent, and that grad I, grad D are
/// independent. The field X is the system's full field.
inline RegularityReport regularity_report(const DissipativeSystem& sys,
                                          const PeriodicOrbit& orbit, int samples,
                                          const RegularityThresholds& thr = {},
                                          const SynthesisOptions& opt = {}) {
  if (samples < 2) throw InputError("samples", "regularity report needs at least 2 samples");
  if (orbit.dimension() != sys.dimension()) {
    throw DimensionError("orbit and system dimensions differ");
  }
  const int n = sys.dimension();
  RegularityReport rep;
  rep.thresholds = thr;
  rep.min_independence = std::numeric_limits<double>::infinity();
  rep.min_regular_value = std::numeric_limits<double>::infinity();
  rep.min_conserved_regular = std::numeric_limits<double>::infinity();
  for (int j = 0; j < samples; ++j) {
    const double t = orbit.period() * j / samples;
    const Point x = orbit.evaluate(t);
    std::vector<std::vector<double>> grads;
    for (const auto& c : sys.conserved()) {
      rep.max_membership = std::max(rep.max_membership, std::abs(c(x)));
      grads.push_back(c.gradient(x));
    }
    const std::size_t k = grads.size();
    for (const auto& d : sys.dissipated()) {
      rep.max_membership = std::max(rep.max_membership, std::abs(d(x)));
      grads.push_back(d.gradient(x));
    }
    if (k > 0) {
      std::vector<std::vector<double>> cons(grads.begin(), grads.begin() + k);
      rep.min_conserved_regular =
          std::min(rep.min_conserved_regular, detail::smallest_singular_value(cons, n));
    }
    rep.min_regular_value =
        std::min(rep.min_regular_value, detail::smallest_singular_value(grads, n));
    double indep = 0.0;
    try {
      grads.push_back(full_field<double>(sys, x, opt));
      indep = detail::smallest_singular_value(grads, n);
    } catch (const SingularPoint&) {
      indep = 0.0;
    }
    if (indep < rep.min_independence) {
      rep.min_independence = indep;
      rep.worst_independence_time = t;
    }
  }
  rep.membership_ok = rep.max_membership <= thr.membership;
  rep.independence_ok = rep.min_independence > thr.independence;
  rep.regular_value_ok = rep.min_regular_value > thr.regular_value;
  rep.conserved_regular_ok = rep.min_conserved_regular > thr.regular_value;
  return rep;
}

}  // namespace dissipative
