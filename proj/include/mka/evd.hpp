#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "mka/givens.hpp"
#include "mka/matrix.hpp"

namespace mka {

/// A = V diag(eigvals) V^T with eigvals sorted descending and V orthonormal columns.
struct EvdResult {
  std::vector<double> eigvals;
  Matrix eigvecs;
};

namespace detail {

inline double off_diagonal_norm(const SymMatrix& a) {
  double s = 0.0;
  for (std::size_t p = 0; p + 1 < a.order(); ++p)
    for (std::size_t q = p + 1; q < a.order(); ++q) s += a(p, q) * a(p, q);
  return std::sqrt(2.0 * s);
}

}  // namespace detail

/// Symmetric eigendecomposition by cyclic Jacobi sweeps.
/// Converges when the off-diagonal norm drops below 1e-12 * ||A||_F;
/// throws after 30 sweeps without convergence.
inline EvdResult sym_evd(const SymMatrix& a) {
  constexpr int kMaxSweeps = 30;
  const std::size_t n = a.order();
  SymMatrix w = a;
  Matrix v = Matrix::identity(n);
  const double threshold = 1e-12 * a.frobenius_norm();

  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (detail::off_diagonal_norm(w) <= threshold) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (w(p, q) == 0.0) continue;
        const double theta = 0.5 * std::atan2(2.0 * w(p, q), w(p, p) - w(q, q));
        const GivensRotation g(p, q, std::cos(theta), std::sin(theta));
        conjugate_in_place(w, g);
        // accumulate V <- V G^T so that A = V diag V^T
        for (std::size_t k = 0; k < n; ++k) {
          const double vp = v(k, p), vq = v(k, q);
          v(k, p) = g.c * vp + g.s * vq;
          v(k, q) = -g.s * vp + g.c * vq;
        }
      }
    }
  }
  if (!converged && detail::off_diagonal_norm(w) > threshold)
    throw std::runtime_error("sym_evd: Jacobi iteration did not converge within 30 sweeps");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = w(i, i);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return diag[x] > diag[y]; });

  EvdResult res{std::vector<double>(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    res.eigvals[k] = diag[order[k]];
    for (std::size_t r = 0; r < n; ++r) res.eigvecs(r, k) = v(r, order[k]);
  }
  return res;
}

}  // namespace mka
