#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "mka/cholesky.hpp"
#include "mka/factorization.hpp"
#include "mka/matrix.hpp"
#include "mka/rng.hpp"

namespace mka {

struct Dataset {
  Matrix x;               // n x d features
  std::vector<double> y;  // n targets

  std::size_t size() const { return y.size(); }

  void validate() const {
    if (y.empty() || x.rows() != y.size())
      throw std::invalid_argument("Dataset: feature rows must match target count (n >= 1)");
  }
};

struct GpHyper {
  double lengthscale = 1.0;
  double noise = 0.0;  // sigma^2

  void validate() const {
    if (!(lengthscale > 0.0)) throw std::invalid_argument("GpHyper: lengthscale must be > 0");
    if (noise < 0.0) throw std::invalid_argument("GpHyper: noise must be >= 0");
  }
};

struct PredictionResult {
  std::vector<double> mean;
  std::vector<double> variance;
};

/// Gaussian kernel matrix: entry (i,j) = exp(-||x_i - x'_j||^2 / (2 l^2)).
inline Matrix kernel_matrix(const Matrix& x, const Matrix& x2, const GpHyper& hyper) {
  hyper.validate();
  if (x.cols() != x2.cols()) throw std::invalid_argument("kernel_matrix: dimension mismatch");
  Matrix k(x.rows(), x2.rows());
  const double inv = 1.0 / (2.0 * hyper.lengthscale * hyper.lengthscale);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x2.rows(); ++j) {
      double d2 = 0.0;
      for (std::size_t f = 0; f < x.cols(); ++f) {
        const double d = x(i, f) - x2(j, f);
        d2 += d * d;
      }
      k(i, j) = std::exp(-d2 * inv);
    }
  return k;
}

/// Joint train/test kernel matrix of order n+p: the train block carries the
/// sigma^2 noise on its diagonal, the cross and test blocks are noise free.
inline SymMatrix joint_kernel_matrix(const Dataset& train, const Matrix& test_x,
                                     const GpHyper& hyper) {
  train.validate();
  hyper.validate();
  if (train.x.cols() != test_x.cols())
    throw std::invalid_argument("joint_kernel_matrix: dimension mismatch");
  const std::size_t n = train.size(), p = test_x.rows();
  const Matrix ktrain = kernel_matrix(train.x, train.x, hyper);
  const Matrix kcross = kernel_matrix(train.x, test_x, hyper);
  const Matrix ktest = kernel_matrix(test_x, test_x, hyper);

  SymMatrix joint(n + p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      joint.set(i, j, ktrain(i, j) + (i == j ? hyper.noise : 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) joint.set(i, n + j, kcross(i, j));
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i; j < p; ++j) joint.set(n + i, n + j, ktest(i, j));
  return joint;
}

/// Exact GP regression through a Cholesky factorization of K + sigma^2 I.
inline PredictionResult full_gp_predict(const Dataset& train, const Matrix& test_x,
                                        const GpHyper& hyper) {
  train.validate();
  hyper.validate();
  const std::size_t n = train.size(), p = test_x.rows();
  const Matrix ktrain = kernel_matrix(train.x, train.x, hyper);
  SymMatrix kn(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) kn.set(i, j, ktrain(i, j) + (i == j ? hyper.noise : 0.0));
  const CholeskyFactor chol(kn);

  const std::vector<double> alpha = chol.solve(train.y);
  const Matrix kcross = kernel_matrix(train.x, test_x, hyper);
  const Matrix solved_cross = chol.solve(kcross);

  PredictionResult out{std::vector<double>(p, 0.0), std::vector<double>(p, 0.0)};
  for (std::size_t j = 0; j < p; ++j) {
    double mean = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mean += kcross(i, j) * alpha[i];
      quad += kcross(i, j) * solved_cross(i, j);
    }
    out.mean[j] = mean;
    out.variance[j] = 1.0 + hyper.noise - quad;  // k(x,x) = 1 for the Gaussian kernel
  }
  return out;
}

/// Subset of Regressors / Nystrom baseline on the given landmark set:
///   Sigma = (K_{*,I}^T K_{*,I} + sigma^2 W)^{-1}
///   mean = K_{test,I} Sigma K_{*,I}^T y,  var_j = sigma^2 + k_j Sigma k_j^T.
inline PredictionResult sor_predict(const Dataset& train, const Matrix& test_x,
                                    const std::vector<std::size_t>& landmarks,
                                    const GpHyper& hyper) {
  train.validate();
  hyper.validate();
  if (landmarks.empty()) throw std::invalid_argument("sor_predict: landmark set is empty");
  const std::size_t n = train.size(), m = landmarks.size(), p = test_x.rows();

  Matrix lx(m, train.x.cols());
  for (std::size_t t = 0; t < m; ++t) {
    if (landmarks[t] >= n) throw std::invalid_argument("sor_predict: landmark index out of range");
    for (std::size_t f = 0; f < train.x.cols(); ++f) lx(t, f) = train.x(landmarks[t], f);
  }

  const Matrix ki = kernel_matrix(train.x, lx, hyper);  // n x m
  const Matrix w = kernel_matrix(lx, lx, hyper);        // m x m

  double trace = 0.0;
  for (std::size_t t = 0; t < m; ++t) trace += w(t, t);
  const double ridge = 1e-10 * trace / static_cast<double>(m);

  SymMatrix inner(m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a; b < m; ++b) {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += ki(i, a) * ki(i, b);
      double v = dot + hyper.noise * (w(a, b) + (a == b ? ridge : 0.0));
      inner.set(a, b, v);
    }
  const CholeskyFactor chol(inner);

  std::vector<double> kty(m, 0.0);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t i = 0; i < n; ++i) kty[a] += ki(i, a) * train.y[i];
  const std::vector<double> weights = chol.solve(kty);

  const Matrix kt = kernel_matrix(test_x, lx, hyper);  // p x m
  PredictionResult out{std::vector<double>(p, 0.0), std::vector<double>(p, 0.0)};
  std::vector<double> row(m);
  for (std::size_t j = 0; j < p; ++j) {
    double mean = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
      mean += kt(j, a) * weights[a];
      row[a] = kt(j, a);
    }
    const std::vector<double> solved = chol.solve(row);
    double quad = 0.0;
    for (std::size_t a = 0; a < m; ++a) quad += row[a] * solved[a];
    out.mean[j] = mean;
    out.variance[j] = hyper.noise + quad;
  }
  return out;
}

/// Uniform landmark draw without replacement, in ascending order.
inline std::vector<std::size_t> sample_landmarks(std::size_t n, std::size_t count,
                                                 std::uint64_t seed) {
  rng::Engine rng(seed);
  std::vector<std::size_t> picks = rng.sample_without_replacement(n, count);
  std::sort(picks.begin(), picks.end());
  return picks;
}

namespace detail {

/// Matrix-free application of the train-block inverse of the approximated
/// joint matrix: given Finv = (joint K~)^-1 in factored form, computes
/// (A - B D^-1 C) v for a train-part vector v via the Schur complement of the
/// test block D (extracted column by column, never materializing Finv).
class SchurTrainInverse {
 public:
  SchurTrainInverse(const MkaFactorization& finv, std::size_t n_train, std::size_t p_test)
      : finv_(finv), n_(n_train), p_(p_test), d_factor_(extract_d_factor()) {}

  std::vector<double> apply(const std::vector<double>& v) const {
    std::vector<double> padded(n_ + p_, 0.0);
    std::copy(v.begin(), v.end(), padded.begin());
    const std::vector<double> uw = mka_apply(finv_, padded);

    std::vector<double> w(uw.begin() + static_cast<std::ptrdiff_t>(n_), uw.end());
    const std::vector<double> dv = d_factor_.solve(w);

    std::vector<double> back(n_ + p_, 0.0);
    std::copy(dv.begin(), dv.end(), back.begin() + static_cast<std::ptrdiff_t>(n_));
    const std::vector<double> corr = mka_apply(finv_, back);

    std::vector<double> out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = uw[i] - corr[i];
    return out;
  }

 private:
  CholeskyFactor extract_d_factor() const {
    SymMatrix d(p_);
    std::vector<double> unit(n_ + p_, 0.0);
    for (std::size_t t = 0; t < p_; ++t) {
      unit[n_ + t] = 1.0;
      const std::vector<double> col = mka_apply(finv_, unit);
      unit[n_ + t] = 0.0;
      for (std::size_t r = t; r < p_; ++r) d.set(r, t, col[n_ + r]);
    }
    try {
      return CholeskyFactor(d);
    } catch (const std::domain_error&) {
      throw std::domain_error("mka_gp_predict: test block D of the factored inverse is singular");
    }
  }

  const MkaFactorization& finv_;
  std::size_t n_;
  std::size_t p_;
  CholeskyFactor d_factor_;
};

}  // namespace detail

/// MKA-GP prediction: factorizes the joint train/test kernel matrix, inverts
/// it in factored form, and recovers the train-block inverse via the Schur
/// complement of the test block.
inline PredictionResult mka_gp_predict(const Dataset& train, const Matrix& test_x,
                                       const GpHyper& hyper, const MkaConfig& cfg,
                                       std::size_t threads = 1) {
  train.validate();
  hyper.validate();
  const std::size_t n = train.size(), p = test_x.rows();
  if (p == 0) throw std::invalid_argument("mka_gp_predict: test set is empty");

  const SymMatrix joint = joint_kernel_matrix(train, test_x, hyper);
  const MkaFactorization f = mka_factorize(joint, cfg, threads);
  const MkaFactorization finv = mka_spectral(f, SpectralFunction::power(-1.0));
  const detail::SchurTrainInverse train_inverse(finv, n, p);

  const std::vector<double> ky = train_inverse.apply(train.y);
  const Matrix kcross = kernel_matrix(train.x, test_x, hyper);

  PredictionResult out{std::vector<double>(p, 0.0), std::vector<double>(p, 0.0)};
  std::vector<double> col(n);
  for (std::size_t j = 0; j < p; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mean += kcross(i, j) * ky[i];
      col[i] = kcross(i, j);
    }
    const std::vector<double> solved = train_inverse.apply(col);
    double quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) quad += col[i] * solved[i];
    out.mean[j] = mean;
    out.variance[j] = 1.0 + hyper.noise - quad;
  }
  return out;
}

}  // namespace mka
