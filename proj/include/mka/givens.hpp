#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mka/matrix.hpp"

namespace mka {

/// Plane rotation acting on coordinates (i, j), i < j:
///   G(i,i) = c, G(i,j) = s, G(j,i) = -s, G(j,j) = c, identity elsewhere.
struct GivensRotation {
  std::size_t i;
  std::size_t j;
  double c;
  double s;

  GivensRotation(std::size_t i_, std::size_t j_, double c_, double s_)
      : i(i_), j(j_), c(c_), s(s_) {
    if (i >= j) throw std::invalid_argument("GivensRotation: requires i < j");
    if (std::abs(c * c + s * s - 1.0) > 1e-12)
      throw std::invalid_argument("GivensRotation: c^2 + s^2 must be 1");
  }

  GivensRotation transposed() const { return GivensRotation(i, j, c, -s); }
};

/// v <- G v restricted to the (offset+i, offset+j) plane.
inline void rotate_vector(std::vector<double>& v, const GivensRotation& g,
                          std::size_t offset = 0) {
  const std::size_t i = offset + g.i, j = offset + g.j;
  const double vi = v[i], vj = v[j];
  v[i] = g.c * vi + g.s * vj;
  v[j] = -g.s * vi + g.c * vj;
}

/// a <- G a G^T in place; only rows/columns offset+i and offset+j change.
inline void conjugate_in_place(SymMatrix& a, const GivensRotation& g, std::size_t offset = 0) {
  const std::size_t n = a.order();
  const std::size_t i = offset + g.i, j = offset + g.j;
  if (j >= n) throw std::invalid_argument("conjugate_in_place: rotation index out of range");
  const double c = g.c, s = g.s;
  const double aii = a(i, i), ajj = a(j, j), aij = a(i, j);
  for (std::size_t k = 0; k < n; ++k) {
    if (k == i || k == j) continue;
    const double aik = a(i, k), ajk = a(j, k);
    a.set(i, k, c * aik + s * ajk);
    a.set(j, k, -s * aik + c * ajk);
  }
  a.set(i, i, c * c * aii + 2.0 * c * s * aij + s * s * ajj);
  a.set(j, j, s * s * aii - 2.0 * c * s * aij + c * c * ajj);
  a.set(i, j, c * s * (ajj - aii) + (c * c - s * s) * aij);
}

/// Returns g A g^T; A is unchanged. Eigenvalues are preserved.
inline SymMatrix apply_givens_conjugate(const SymMatrix& a, const GivensRotation& g) {
  if (g.j >= a.order()) throw std::invalid_argument("apply_givens_conjugate: index out of range");
  SymMatrix out = a;
  conjugate_in_place(out, g);
  return out;
}

/// Ordered product Q = q_L ... q_1 of Givens rotations on R^dim
/// (the first rotation pushed acts first).
class RotationSequence {
 public:
  explicit RotationSequence(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t count() const { return rotations_.size(); }
  const std::vector<GivensRotation>& rotations() const { return rotations_; }

  void push(const GivensRotation& g) {
    if (g.j >= dim_) throw std::invalid_argument("RotationSequence: rotation index out of range");
    rotations_.push_back(g);
  }

  /// v <- Q v
  void apply(std::vector<double>& v, std::size_t offset = 0) const {
    for (const auto& g : rotations_) rotate_vector(v, g, offset);
  }

  /// v <- Q^T v
  void apply_transpose(std::vector<double>& v, std::size_t offset = 0) const {
    for (auto it = rotations_.rbegin(); it != rotations_.rend(); ++it)
      rotate_vector(v, it->transposed(), offset);
  }

  /// Q A Q^T
  SymMatrix conjugate(const SymMatrix& a) const {
    SymMatrix out = a;
    for (const auto& g : rotations_) conjugate_in_place(out, g);
    return out;
  }

  /// Q^T A Q
  SymMatrix conjugate_transpose(const SymMatrix& a) const {
    SymMatrix out = a;
    for (auto it = rotations_.rbegin(); it != rotations_.rend(); ++it)
      conjugate_in_place(out, it->transposed());
    return out;
  }

  /// Dense expansion of Q (for diagnostics and oracle checks).
  Matrix dense() const {
    Matrix q = Matrix::identity(dim_);
    for (const auto& g : rotations_) {
      for (std::size_t k = 0; k < dim_; ++k) {
        const double ri = q(g.i, k), rj = q(g.j, k);
        q(g.i, k) = g.c * ri + g.s * rj;
        q(g.j, k) = -g.s * ri + g.c * rj;
      }
    }
    return q;
  }

 private:
  std::size_t dim_;
  std::vector<GivensRotation> rotations_;
};

}  // namespace mka
