#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "mka/gp.hpp"

namespace mka {

/// Standardized mean square error: mean squared error divided by the
/// population variance of the test targets.
inline double smse(const std::vector<double>& pred_mean, const std::vector<double>& y_test) {
  if (pred_mean.size() != y_test.size()) throw std::invalid_argument("smse: length mismatch");
  const std::size_t n = y_test.size();
  if (n < 2) throw std::invalid_argument("smse: needs at least two test points");

  double mean = 0.0;
  for (double y : y_test) mean += y;
  mean /= static_cast<double>(n);

  double sq_err = 0.0, variance = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double e = pred_mean[t] - y_test[t];
    sq_err += e * e;
    const double d = y_test[t] - mean;
    variance += d * d;
  }
  if (variance == 0.0) throw std::invalid_argument("smse: test targets are constant");
  return sq_err / variance;  // the 1/n factors cancel
}

enum class MnlpVariance {
  per_point,  // each point's predictive variance (standard MNLP)
  global      // population variance of the test targets for every point
};

/// Mean negative log probability:
///   (1/n) sum_t ( (mean_t - y_t)^2 / v_t + log v_t + log 2 pi ).
inline double mnlp(const PredictionResult& pred, const std::vector<double>& y_test,
                   MnlpVariance variance_mode = MnlpVariance::per_point) {
  if (pred.mean.size() != y_test.size() || pred.variance.size() != y_test.size())
    throw std::invalid_argument("mnlp: length mismatch");
  const std::size_t n = y_test.size();
  if (n == 0) throw std::invalid_argument("mnlp: empty test set");

  double global_variance = 0.0;
  if (variance_mode == MnlpVariance::global) {
    double mean = 0.0;
    for (double y : y_test) mean += y;
    mean /= static_cast<double>(n);
    for (double y : y_test) global_variance += (y - mean) * (y - mean);
    global_variance /= static_cast<double>(n);
  }

  const double log_2pi = std::log(2.0 * 3.14159265358979323846);
  double sum = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double v =
        variance_mode == MnlpVariance::per_point ? pred.variance[t] : global_variance;
    if (!(v > 0.0))
      throw std::invalid_argument("mnlp: non-positive predictive variance at point " +
                                  std::to_string(t));
    const double e = pred.mean[t] - y_test[t];
    sum += e * e / v + std::log(v) + log_2pi;
  }
  return sum / static_cast<double>(n);
}

}  // namespace mka
