#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace mka {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw std::invalid_argument("Matrix multiply: shape mismatch");
    Matrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
      }
    return out;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline std::vector<double> matvec(const Matrix& a, const std::vector<double>& x) {
  if (a.cols() != x.size()) throw std::invalid_argument("matvec: shape mismatch");
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

/// Symmetric matrix with full dense storage; writes go to both (i,j) and (j,i).
class SymMatrix {
 public:
  explicit SymMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {
    if (n == 0) throw std::invalid_argument("SymMatrix: order must be >= 1");
  }

  static SymMatrix identity(std::size_t n) {
    SymMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m.data_[i * n + i] = 1.0;
    return m;
  }

  /// Builds from a square dense matrix; rejects asymmetry beyond tol (absolute).
  static SymMatrix from_matrix(const Matrix& a, double tol = 1e-9) {
    if (a.rows() != a.cols()) throw std::invalid_argument("SymMatrix::from_matrix: not square");
    SymMatrix m(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t j = i; j < a.cols(); ++j) {
        if (std::abs(a(i, j) - a(j, i)) > tol)
          throw std::invalid_argument("SymMatrix::from_matrix: input is not symmetric at (" +
                                      std::to_string(i) + "," + std::to_string(j) + ")");
        m.set(i, j, a(i, j));
      }
    return m;
  }

  std::size_t order() const { return n_; }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  void set(std::size_t i, std::size_t j, double v) {
    data_[i * n_ + j] = v;
    data_[j * n_ + i] = v;
  }

  Matrix to_matrix() const {
    Matrix m(n_, n_);
    m.data() = data_;
    return m;
  }

  /// Principal submatrix picked out by `indices` (need not be sorted).
  SymMatrix submatrix(const std::vector<std::size_t>& indices) const {
    SymMatrix out(indices.size());
    for (std::size_t a = 0; a < indices.size(); ++a)
      for (std::size_t b = a; b < indices.size(); ++b)
        out.set(a, b, (*this)(indices[a], indices[b]));
    return out;
  }

  /// Contiguous principal block [offset, offset+len).
  SymMatrix block(std::size_t offset, std::size_t len) const {
    SymMatrix out(len);
    for (std::size_t a = 0; a < len; ++a)
      for (std::size_t b = a; b < len; ++b) out.set(a, b, (*this)(offset + a, offset + b));
    return out;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  friend bool operator==(const SymMatrix& a, const SymMatrix& b) {
    return a.n_ == b.n_ && a.data_ == b.data_;
  }

 private:
  std::size_t n_;
  std::vector<double> data_;
};

inline std::vector<double> matvec(const SymMatrix& a, const std::vector<double>& x) {
  if (a.order() != x.size()) throw std::invalid_argument("matvec: shape mismatch");
  std::vector<double> y(a.order(), 0.0);
  for (std::size_t i = 0; i < a.order(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.order(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

/// Index permutation; ord[k] is the source index placed at position k.
class Permutation {
 public:
  explicit Permutation(std::vector<std::size_t> ord) : ord_(std::move(ord)) {
    std::vector<bool> seen(ord_.size(), false);
    for (std::size_t src : ord_) {
      if (src >= ord_.size() || seen[src])
        throw std::invalid_argument("Permutation: ord is not a bijection");
      seen[src] = true;
    }
  }

  static Permutation identity(std::size_t n) {
    std::vector<std::size_t> ord(n);
    std::iota(ord.begin(), ord.end(), std::size_t{0});
    return Permutation(std::move(ord));
  }

  std::size_t size() const { return ord_.size(); }
  std::size_t operator[](std::size_t k) const { return ord_[k]; }
  const std::vector<std::size_t>& ord() const { return ord_; }

  Permutation inverse() const {
    std::vector<std::size_t> inv(ord_.size());
    for (std::size_t k = 0; k < ord_.size(); ++k) inv[ord_[k]] = k;
    return Permutation(std::move(inv));
  }

  /// out[k] = v[ord[k]]
  std::vector<double> apply(const std::vector<double>& v) const {
    if (v.size() != ord_.size()) throw std::invalid_argument("Permutation::apply: length mismatch");
    std::vector<double> out(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) out[k] = v[ord_[k]];
    return out;
  }

  /// out[ord[k]] = v[k]   (i.e. the transpose / inverse action)
  std::vector<double> apply_inverse(const std::vector<double>& v) const {
    if (v.size() != ord_.size())
      throw std::invalid_argument("Permutation::apply_inverse: length mismatch");
    std::vector<double> out(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) out[ord_[k]] = v[k];
    return out;
  }

  friend bool operator==(const Permutation& a, const Permutation& b) { return a.ord_ == b.ord_; }

 private:
  std::vector<std::size_t> ord_;
};

/// out(k,l) = a(ord[k], ord[l])
inline SymMatrix permute_sym(const SymMatrix& a, const Permutation& p) {
  if (p.size() != a.order()) throw std::invalid_argument("permute_sym: length mismatch");
  SymMatrix out(a.order());
  for (std::size_t k = 0; k < a.order(); ++k)
    for (std::size_t l = k; l < a.order(); ++l) out.set(k, l, a(p[k], p[l]));
  return out;
}

}  // namespace mka
