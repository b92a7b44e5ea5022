#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "mka/matrix.hpp"

namespace mka {

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
class CholeskyFactor {
 public:
  explicit CholeskyFactor(const SymMatrix& a) : n_(a.order()), l_(n_, n_) {
    for (std::size_t j = 0; j < n_; ++j) {
      double d = a(j, j);
      for (std::size_t k = 0; k < j; ++k) d -= l_(j, k) * l_(j, k);
      if (d <= 0.0)
        throw std::domain_error("cholesky: matrix is not positive definite (pivot " +
                                std::to_string(j) + " = " + std::to_string(d) + ")");
      l_(j, j) = std::sqrt(d);
      for (std::size_t i = j + 1; i < n_; ++i) {
        double s = a(i, j);
        for (std::size_t k = 0; k < j; ++k) s -= l_(i, k) * l_(j, k);
        l_(i, j) = s / l_(j, j);
      }
    }
  }

  std::size_t order() const { return n_; }
  const Matrix& lower() const { return l_; }

  std::vector<double> solve(const std::vector<double>& b) const {
    if (b.size() != n_) throw std::invalid_argument("cholesky solve: length mismatch");
    std::vector<double> x = b;
    for (std::size_t i = 0; i < n_; ++i) {  // L y = b
      double s = x[i];
      for (std::size_t k = 0; k < i; ++k) s -= l_(i, k) * x[k];
      x[i] = s / l_(i, i);
    }
    for (std::size_t ii = n_; ii-- > 0;) {  // L^T x = y
      double s = x[ii];
      for (std::size_t k = ii + 1; k < n_; ++k) s -= l_(k, ii) * x[k];
      x[ii] = s / l_(ii, ii);
    }
    return x;
  }

  Matrix solve(const Matrix& b) const {
    if (b.rows() != n_) throw std::invalid_argument("cholesky solve: shape mismatch");
    Matrix x(b.rows(), b.cols());
    std::vector<double> col(n_);
    for (std::size_t j = 0; j < b.cols(); ++j) {
      for (std::size_t i = 0; i < n_; ++i) col[i] = b(i, j);
      col = solve(col);
      for (std::size_t i = 0; i < n_; ++i) x(i, j) = col[i];
    }
    return x;
  }

 private:
  std::size_t n_;
  Matrix l_;
};

/// Solves A x = b for symmetric positive definite A.
inline std::vector<double> cholesky_solve(const SymMatrix& a, const std::vector<double>& b) {
  return CholeskyFactor(a).solve(b);
}

/// Column-wise solve A X = B.
inline Matrix cholesky_solve(const SymMatrix& a, const Matrix& b) {
  return CholeskyFactor(a).solve(b);
}

}  // namespace mka
