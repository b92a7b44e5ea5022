#pragma once

// Test-only oracles, independent of the library's own linear algebra:
// every [DERIVED] expectation is checked against Eigen or a direct
// formula evaluation, never against the code path under test.

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <functional>
#include <vector>

#include "mka/matrix.hpp"
#include "mka/rng.hpp"

namespace oracle {

inline Eigen::MatrixXd to_eigen(const mka::Matrix& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(static_cast<long>(i), static_cast<long>(j)) = m(i, j);
  return out;
}

inline Eigen::MatrixXd to_eigen(const mka::SymMatrix& m) { return to_eigen(m.to_matrix()); }

inline mka::SymMatrix sym_from_eigen(const Eigen::MatrixXd& e) {
  mka::SymMatrix out(static_cast<std::size_t>(e.rows()));
  for (long i = 0; i < e.rows(); ++i)
    for (long j = i; j < e.cols(); ++j)
      out.set(static_cast<std::size_t>(i), static_cast<std::size_t>(j), 0.5 * (e(i, j) + e(j, i)));
  return out;
}

/// Eigenvalues sorted descending.
inline std::vector<double> eigenvalues(const mka::SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(m));
  std::vector<double> vals(es.eigenvalues().data(), es.eigenvalues().data() + m.order());
  std::sort(vals.rbegin(), vals.rend());
  return vals;
}

inline double min_eigenvalue(const mka::SymMatrix& m) { return eigenvalues(m).back(); }

/// f applied to the spectrum, via Eigen's eigendecomposition.
inline mka::SymMatrix spectral_apply(const mka::SymMatrix& m,
                                     const std::function<double(double)>& f) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(m));
  Eigen::VectorXd vals = es.eigenvalues();
  for (long i = 0; i < vals.size(); ++i) vals(i) = f(vals(i));
  const Eigen::MatrixXd out =
      es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().transpose();
  return sym_from_eigen(out);
}

inline std::vector<double> solve(const mka::SymMatrix& a, const std::vector<double>& b) {
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<long>(b.size()));
  const Eigen::VectorXd x = to_eigen(a).ldlt().solve(rhs);
  return {x.data(), x.data() + x.size()};
}

/// EVD-based solve (the independent route for the Cholesky cross-check).
inline std::vector<double> evd_solve(const mka::SymMatrix& a, const std::vector<double>& b) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(a));
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<long>(b.size()));
  const Eigen::VectorXd x = es.eigenvectors() *
                            es.eigenvalues().cwiseInverse().asDiagonal() *
                            (es.eigenvectors().transpose() * rhs);
  return {x.data(), x.data() + x.size()};
}

inline double log_det(const mka::SymMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(a));
  double sum = 0.0;
  for (long i = 0; i < es.eigenvalues().size(); ++i) sum += std::log(es.eigenvalues()(i));
  return sum;
}

inline double rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

inline double rel_fro_diff(const mka::SymMatrix& a, const mka::SymMatrix& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.order(); ++i)
    for (std::size_t j = 0; j < a.order(); ++j) {
      num += (a(i, j) - b(i, j)) * (a(i, j) - b(i, j));
      den += b(i, j) * b(i, j);
    }
  return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

inline mka::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  mka::rng::Engine rng(seed);
  mka::Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.next_gaussian();
  return m;
}

inline mka::SymMatrix random_sym(std::size_t n, std::uint64_t seed) {
  mka::rng::Engine rng(seed);
  mka::SymMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) m.set(i, j, rng.next_gaussian());
  return m;
}

/// Wishart-style random spsd matrix: (G G^T) / n.
inline mka::SymMatrix random_spsd(std::size_t n, std::uint64_t seed) {
  const mka::Matrix g = random_matrix(n, n, seed);
  mka::SymMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += g(i, k) * g(j, k);
      m.set(i, j, s / static_cast<double>(n));
    }
  return m;
}

/// Random spd matrix with a ridge, comfortably invertible.
inline mka::SymMatrix random_spd(std::size_t n, std::uint64_t seed, double ridge = 0.1) {
  mka::SymMatrix m = random_spsd(n, seed);
  for (std::size_t i = 0; i < n; ++i) m.set(i, i, m(i, i) + ridge);
  return m;
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  mka::rng::Engine rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.next_gaussian();
  return v;
}

}  // namespace oracle
