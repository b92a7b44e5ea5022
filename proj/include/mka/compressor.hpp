#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mka/givens.hpp"
#include "mka/matrix.hpp"

namespace mka {

/// One greedy-Jacobi MMF compression: Q as a Givens sequence plus the
/// core / wavelet index split it produced (indices in rotated coordinates).
struct CoreDiagonalCompression {
  RotationSequence rotation;
  std::size_t core_size;
  std::vector<std::size_t> core_indices;     // ascending
  std::vector<std::size_t> wavelet_indices;  // designation order
};

/// c-core-diagonal matrix: dense c x c core plus the remaining diagonal.
struct CoreDiagonal {
  std::size_t c;
  SymMatrix core;
  std::vector<double> tail;
};

namespace detail {

/// Gram-similarity pair selection over the active set: maximizes
/// |G(i,j)| / sqrt(G(i,i) G(j,j)); ties go to the lexicographically
/// smallest pair, zero-norm columns count as similarity 0.
inline std::pair<std::size_t, std::size_t> select_pair(const SymMatrix& gram,
                                                       const std::vector<std::size_t>& active) {
  std::size_t bi = active[0], bj = active[1];
  double best = -1.0;
  for (std::size_t a = 0; a + 1 < active.size(); ++a) {
    for (std::size_t b = a + 1; b < active.size(); ++b) {
      const std::size_t i = active[a], j = active[b];
      const double gii = gram(i, i), gjj = gram(j, j);
      double sim = 0.0;
      if (gii > 0.0 && gjj > 0.0) sim = std::abs(gram(i, j)) / std::sqrt(gii * gjj);
      if (sim > best) {
        best = sim;
        bi = i;
        bj = j;
      }
    }
  }
  return {bi, bj};
}

/// Off-diagonal row energy of `row` over the active set.
inline double active_row_energy(const SymMatrix& b, const std::vector<std::size_t>& active,
                                std::size_t row) {
  double e = 0.0;
  for (std::size_t k : active) {
    if (k == row) continue;
    e += b(row, k) * b(row, k);
  }
  return e;
}

}  // namespace detail

/// Greedy-Jacobi MMF core-diagonal compression of a symmetric m x m matrix.
/// Produces exactly floor((1-gamma)*m) Givens rotations; the core keeps
/// c = m - floor((1-gamma)*m) coordinates and the tail holds the diagonal
/// entries of Q A Q^T at the wavelet coordinates.
inline std::pair<CoreDiagonalCompression, CoreDiagonal> mmf_compress(const SymMatrix& a,
                                                                     double gamma) {
  if (!(gamma > 0.0) || gamma > 1.0)
    throw std::invalid_argument("mmf_compress: gamma must be in (0, 1]");
  const std::size_t m = a.order();
  const auto rotations_wanted =
      static_cast<std::size_t>(std::floor((1.0 - gamma) * static_cast<double>(m)));
  const std::size_t c = m - rotations_wanted;

  SymMatrix b = a;
  RotationSequence rotation(m);
  std::vector<std::size_t> wavelets;
  wavelets.reserve(rotations_wanted);
  std::vector<std::size_t> active(m);
  std::iota(active.begin(), active.end(), std::size_t{0});

  if (rotations_wanted > 0) {
    // Gram matrix of B; since Q is orthogonal, (QBQ^T)^T(QBQ^T) = Q(B^T B)Q^T,
    // so the Gram update after each rotation is the same conjugation.
    SymMatrix gram(m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i; j < m; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k) s += b(i, k) * b(k, j);
        gram.set(i, j, s);
      }

    for (std::size_t step = 0; step < rotations_wanted; ++step) {
      const auto [i, j] = detail::select_pair(gram, active);
      const double theta = 0.5 * std::atan2(2.0 * b(i, j), b(i, i) - b(j, j));
      const GivensRotation g(i, j, std::cos(theta), std::sin(theta));
      conjugate_in_place(b, g);
      conjugate_in_place(gram, g);
      rotation.push(g);

      const double ei = detail::active_row_energy(b, active, i);
      const double ej = detail::active_row_energy(b, active, j);
      const std::size_t wavelet = ei < ej ? i : j;  // tie: larger index leaves
      wavelets.push_back(wavelet);
      active.erase(std::find(active.begin(), active.end(), wavelet));
    }
  }

  CoreDiagonal cd{c, b.submatrix(active), std::vector<double>(wavelets.size())};
  for (std::size_t t = 0; t < wavelets.size(); ++t) cd.tail[t] = b(wavelets[t], wavelets[t]);
  return {CoreDiagonalCompression{std::move(rotation), c, std::move(active), std::move(wavelets)},
          std::move(cd)};
}

/// || A - Q^T H Q ||_F by dense expansion.
inline double compression_error(const SymMatrix& a, const CoreDiagonalCompression& comp,
                                const CoreDiagonal& h) {
  const std::size_t m = a.order();
  if (comp.rotation.dim() != m || h.c != comp.core_size || h.core.order() != h.c ||
      h.tail.size() != m - h.c || comp.core_indices.size() != h.c)
    throw std::invalid_argument("compression_error: shape mismatch");

  SymMatrix full(m);
  for (std::size_t x = 0; x < h.c; ++x)
    for (std::size_t y = x; y < h.c; ++y)
      full.set(comp.core_indices[x], comp.core_indices[y], h.core(x, y));
  for (std::size_t t = 0; t < h.tail.size(); ++t)
    full.set(comp.wavelet_indices[t], comp.wavelet_indices[t], h.tail[t]);

  const SymMatrix approx = comp.rotation.conjugate_transpose(full);
  double err = 0.0;
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t y = 0; y < m; ++y) {
      const double d = a(x, y) - approx(x, y);
      err += d * d;
    }
  return std::sqrt(err);
}

}  // namespace mka
