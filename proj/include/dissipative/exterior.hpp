#pragma once

// Exterior algebra of R^n with the Euclidean inner product. A MultiVector of
// grade r stores one coefficient per strictly increasing index tuple, in
// lexicographic order. Orientation is fixed by e_1 ^ ... ^ e_n unless a
// negative Orientation is passed to hodge_star.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "dissipative/errors.hpp"

namespace dissipative {

inline constexpr int kMaxExteriorDim = 12;

enum class Orientation : int { positive = 1, negative = -1 };

namespace detail {

struct BasisTable {
  // masks[r] lists the grade-r basis blades (bit i-1 set <=> index i present)
  // in lexicographic order of their index tuples.
  std::vector<std::vector<std::uint32_t>> masks;
  // position of a blade mask inside masks[popcount(mask)]
  std::vector<int> position;
};

inline void enumerate_blades(int n, int r, int start, std::uint32_t mask,
                             std::vector<std::uint32_t>& out) {
  if (r == 0) {
    out.push_back(mask);
    return;
  }
  for (int i = start; i <= n - r; ++i) {
    enumerate_blades(n, r - 1, i + 1, mask | (1u << i), out);
  }
}

inline const BasisTable& basis_table(int n) {
  static const std::array<BasisTable, kMaxExteriorDim + 1> tables = [] {
    std::array<BasisTable, kMaxExteriorDim + 1> all;
    for (int dim = 0; dim <= kMaxExteriorDim; ++dim) {
      BasisTable& t = all[dim];
      t.masks.resize(dim + 1);
      t.position.assign(std::size_t{1} << dim, -1);
      for (int r = 0; r <= dim; ++r) {
        enumerate_blades(dim, r, 0, 0u, t.masks[r]);
        for (std::size_t k = 0; k < t.masks[r].size(); ++k) {
          t.position[t.masks[r][k]] = static_cast<int>(k);
        }
      }
    }
    return all;
  }();
  return tables[n];
}

// Sign of e_A ^ e_B relative to e_{A|B}: parity of pairs (i in A, j in B, i > j).
inline int merge_sign(std::uint32_t a, std::uint32_t b) {
  int swaps = 0;
  while (b != 0) {
    int j = std::countr_zero(b);
    b &= b - 1;
    swaps += std::popcount(a >> (j + 1));
  }
  return (swaps & 1) ? -1 : 1;
}

}  // namespace detail

template <typename T>
class MultiVector {
 public:
  MultiVector(int dimension, int grade) : n_(dimension), r_(grade) {
    if (dimension < 1 || dimension > kMaxExteriorDim) {
      throw DimensionError("exterior dimension must lie in [1, " +
                           std::to_string(kMaxExteriorDim) + "], got " +
                           std::to_string(dimension));
    }
    if (grade < 0 || grade > dimension) {
      throw GradeOverflow("grade " + std::to_string(grade) +
                          " outside [0, " + std::to_string(dimension) + "]");
    }
    coeffs_.assign(table().masks[r_].size(), T(0.0));
  }

  static MultiVector scalar(int dimension, T value) {
    MultiVector m(dimension, 0);
    m.coeffs_[0] = value;
    return m;
  }

  static MultiVector vector(std::span<const T> components) {
    MultiVector m(static_cast<int>(components.size()), 1);
    std::copy(components.begin(), components.end(), m.coeffs_.begin());
    return m;
  }

  /// e_{i1} ^ ... ^ e_{ir} for a strictly increasing 1-based tuple.
  static MultiVector basis(int dimension, std::initializer_list<int> indices) {
    return basis(dimension, std::vector<int>(indices));
  }
  static MultiVector basis(int dimension, const std::vector<int>& indices) {
    MultiVector m(dimension, static_cast<int>(indices.size()));
    m.at(indices) = T(1.0);
    return m;
  }

  /// e_1 ^ ... ^ e_n
  static MultiVector volume(int dimension) {
    MultiVector m(dimension, dimension);
    m.coeffs_[0] = T(1.0);
    return m;
  }

  int dimension() const noexcept { return n_; }
  int grade() const noexcept { return r_; }
  std::size_t size() const noexcept { return coeffs_.size(); }

  std::span<const T> coefficients() const noexcept { return coeffs_; }
  std::span<T> coefficients() noexcept { return coeffs_; }

  /// The 1-based index tuple of the k-th stored coefficient.
  std::vector<int> indices(std::size_t k) const {
    std::vector<int> out;
    std::uint32_t mask = table().masks[r_][k];
    while (mask != 0) {
      out.push_back(std::countr_zero(mask) + 1);
      mask &= mask - 1;
    }
    return out;
  }

  T& at(const std::vector<int>& indices) { return coeffs_[locate(indices)]; }
  const T& at(const std::vector<int>& indices) const {
    return coeffs_[locate(indices)];
  }

  MultiVector& operator+=(const MultiVector& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += o.coeffs_[k];
    return *this;
  }
  MultiVector& operator-=(const MultiVector& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] -= o.coeffs_[k];
    return *this;
  }
  MultiVector& operator*=(const T& s) {
    for (auto& c : coeffs_) c = c * s;
    return *this;
  }

  friend MultiVector operator+(MultiVector a, const MultiVector& b) { return a += b; }
  friend MultiVector operator-(MultiVector a, const MultiVector& b) { return a -= b; }
  friend MultiVector operator*(MultiVector a, const T& s) { return a *= s; }
  friend MultiVector operator*(const T& s, MultiVector a) { return a *= s; }

  /// Drops coefficients with |c| <= eps (only meaningful for T = double).
  MultiVector& prune(double eps) {
    for (auto& c : coeffs_) {
      if (std::abs(c) <= eps) c = T(0.0);
    }
    return *this;
  }

  std::uint32_t mask(std::size_t k) const { return table().masks[r_][k]; }

 private:
  const detail::BasisTable& table() const { return detail::basis_table(n_); }

  std::size_t locate(const std::vector<int>& indices) const {
    if (static_cast<int>(indices.size()) != r_) {
      throw GradeOverflow("index tuple length does not match grade");
    }
    std::uint32_t m = 0;
    int prev = 0;
    for (int i : indices) {
      if (i <= prev || i > n_) {
        throw DimensionError("index tuple must be strictly increasing within [1, n]");
      }
      m |= 1u << (i - 1);
      prev = i;
    }
    return static_cast<std::size_t>(table().position[m]);
  }

  void require_same_shape(const MultiVector& o) const {
    if (o.n_ != n_ || o.r_ != r_) {
      throw DimensionError("multivector shapes differ");
    }
  }

  int n_;
  int r_;
  std::vector<T> coeffs_;
};

template <typename T>
MultiVector<T> wedge(const MultiVector<T>& a, const MultiVector<T>& b) {
  if (a.dimension() != b.dimension()) {
    throw DimensionError("wedge of multivectors in R^" + std::to_string(a.dimension()) +
                         " and R^" + std::to_string(b.dimension()));
  }
  const int n = a.dimension();
  if (a.grade() + b.grade() > n) {
    throw GradeOverflow("wedge grade " + std::to_string(a.grade() + b.grade()) +
                        " exceeds dimension " + std::to_string(n));
  }
  MultiVector<T> out(n, a.grade() + b.grade());
  const auto& pos = detail::basis_table(n).position;
  auto ac = a.coefficients();
  auto bc = b.coefficients();
  auto oc = out.coefficients();
  for (std::size_t i = 0; i < ac.size(); ++i) {
    if constexpr (std::is_same_v<T, double>) {
      if (ac[i] == 0.0) continue;
    }
    const std::uint32_t ma = a.mask(i);
    for (std::size_t j = 0; j < bc.size(); ++j) {
      const std::uint32_t mb = b.mask(j);
      if ((ma & mb) != 0) continue;
      const T term = ac[i] * bc[j];
      if (detail::merge_sign(ma, mb) > 0) {
        oc[pos[ma | mb]] += term;
      } else {
        oc[pos[ma | mb]] -= term;
      }
    }
  }
  return out;
}

/// Wedge of grade-1 factors in the given order; the empty product is 1.
template <typename T>
MultiVector<T> wedge_all(int dimension, const std::vector<std::vector<T>>& factors) {
  MultiVector<T> acc = MultiVector<T>::scalar(dimension, T(1.0));
  for (const auto& f : factors) {
    if (static_cast<int>(f.size()) != dimension) {
      throw DimensionError("wedge factor has wrong length");
    }
    acc = wedge(acc, MultiVector<T>::vector(f));
  }
  return acc;
}

/// Hodge dual: *e_J = sgn(J, J^c) e_{J^c}, times -1 for negative orientation.
template <typename T>
MultiVector<T> hodge_star(const MultiVector<T>& a,
                          Orientation orientation = Orientation::positive) {
  const int n = a.dimension();
  const std::uint32_t full = (1u << n) - 1u;
  MultiVector<T> out(n, n - a.grade());
  const auto& pos = detail::basis_table(n).position;
  auto ac = a.coefficients();
  auto oc = out.coefficients();
  const int o = static_cast<int>(orientation);
  for (std::size_t i = 0; i < ac.size(); ++i) {
    const std::uint32_t m = a.mask(i);
    const std::uint32_t c = full & ~m;
    const int s = detail::merge_sign(m, c) * o;
    oc[pos[c]] = (s > 0) ? ac[i] : -ac[i];
  }
  return out;
}

/// Euclidean inner product of same-shape multivectors (basis blades orthonormal).
template <typename T>
T inner(const MultiVector<T>& a, const MultiVector<T>& b) {
  if (a.dimension() != b.dimension() || a.grade() != b.grade()) {
    throw DimensionError("inner product of multivectors with different shapes");
  }
  T acc(0.0);
  auto ac = a.coefficients();
  auto bc = b.coefficients();
  for (std::size_t k = 0; k < ac.size(); ++k) acc += ac[k] * bc[k];
  return acc;
}

template <typename T>
T norm_squared(const MultiVector<T>& a) {
  return inner(a, a);
}

/// Grade-1 multivector as a plain component vector.
template <typename T>
std::vector<T> to_vector(const MultiVector<T>& a) {
  if (a.grade() != 1) throw GradeOverflow("expected a grade-1 multivector");
  auto c = a.coefficients();
  return {c.begin(), c.end()};
}

/// sqrt(det G) for the Gram matrix G of the given vectors, i.e. the volume of
/// the parallelotope they span.
inline double decomposable_norm(const std::vector<std::vector<double>>& vectors) {
  if (vectors.empty()) throw DimensionError("decomposable_norm of an empty list");
  const std::size_t n = vectors.front().size();
  const std::size_t m = vectors.size();
  if (m > n) throw GradeOverflow("more vectors than the ambient dimension");
  for (const auto& v : vectors) {
    if (v.size() != n) throw DimensionError("vectors of different dimensions");
  }
  std::vector<double> g(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += vectors[i][k] * vectors[j][k];
      g[i * m + j] = s;
    }
  }
  // Gaussian elimination with partial pivoting
  double det = 1.0;
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r) {
      if (std::abs(g[r * m + col]) > std::abs(g[piv * m + col])) piv = r;
    }
    if (g[piv * m + col] == 0.0) return 0.0;
    if (piv != col) {
      for (std::size_t c = 0; c < m; ++c) std::swap(g[piv * m + c], g[col * m + c]);
      det = -det;
    }
    det *= g[col * m + col];
    for (std::size_t r = col + 1; r < m; ++r) {
      const double f = g[r * m + col] / g[col * m + col];
      for (std::size_t c = col; c < m; ++c) g[r * m + c] -= f * g[col * m + c];
    }
  }
  return std::sqrt(std::max(det, 0.0));
}

}  // namespace dissipative
