#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "mka/gp.hpp"
#include "mka/metrics.hpp"
#include "oracles.hpp"

using Catch::Approx;

namespace {

// points spread over a few length scales, so kernel systems stay conditioned
mka::Dataset spread_dataset(std::size_t n, std::size_t d, std::uint64_t seed) {
  mka::rng::Engine rng(seed);
  mka::Dataset ds{mka::Matrix(n, d), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) ds.x(i, j) = 5.0 * rng.next_unit();
    ds.y[i] = rng.next_gaussian();
  }
  return ds;
}

// full GP evaluated through Eigen's eigendecomposition, as in the formulas
mka::PredictionResult full_gp_oracle(const mka::Dataset& train, const mka::Matrix& test_x,
                                     const mka::GpHyper& hyper) {
  const std::size_t n = train.size(), p = test_x.rows();
  const Eigen::MatrixXd k =
      oracle::to_eigen(mka::kernel_matrix(train.x, train.x, hyper)) +
      hyper.noise * Eigen::MatrixXd::Identity(static_cast<long>(n), static_cast<long>(n));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
  const Eigen::MatrixXd kinv = es.eigenvectors() *
                               es.eigenvalues().cwiseInverse().asDiagonal() *
                               es.eigenvectors().transpose();
  const Eigen::MatrixXd cross = oracle::to_eigen(mka::kernel_matrix(train.x, test_x, hyper));
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(train.y.data(), static_cast<long>(n));
  const Eigen::VectorXd mean = cross.transpose() * (kinv * y);
  mka::PredictionResult out{std::vector<double>(p), std::vector<double>(p)};
  for (std::size_t j = 0; j < p; ++j) {
    const Eigen::VectorXd kj = cross.col(static_cast<long>(j));
    out.mean[j] = mean(static_cast<long>(j));
    out.variance[j] = 1.0 + hyper.noise - kj.dot(kinv * kj);
  }
  return out;
}

}  // namespace

TEST_CASE("kernel values follow the Gaussian formula") {
  mka::Matrix a(1, 1), b(2, 1);
  a(0, 0) = 0.0;
  b(0, 0) = 0.0;
  b(1, 0) = 1.0;
  const mka::Matrix k = mka::kernel_matrix(a, b, {0.5, 0.0});
  REQUIRE(k(0, 0) == 1.0);
  REQUIRE(k(0, 1) == Approx(std::exp(-2.0)).margin(1e-12));

  const mka::Dataset ds = spread_dataset(12, 2, 3);
  const mka::Matrix kk = mka::kernel_matrix(ds.x, ds.x, {1.0, 0.0});
  for (std::size_t i = 0; i < 12; ++i) {
    REQUIRE(kk(i, i) == 1.0);
    for (std::size_t j = 0; j < 12; ++j) {
      REQUIRE(kk(i, j) == kk(j, i));
      REQUIRE(kk(i, j) > 0.0);
      REQUIRE(kk(i, j) <= 1.0);
    }
  }
  REQUIRE(oracle::min_eigenvalue(mka::SymMatrix::from_matrix(kk, 1e-12)) >= -1e-10);

  mka::Matrix wrong(2, 3);
  REQUIRE_THROWS_AS(mka::kernel_matrix(a, wrong, {0.5, 0.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(mka::kernel_matrix(a, b, {0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("joint kernel matrix blocks and noise placement") {
  mka::Dataset train{mka::Matrix(1, 1), {1.0}};
  train.x(0, 0) = 0.7;
  mka::Matrix test(1, 1);
  test(0, 0) = 0.7;
  const mka::SymMatrix joint = mka::joint_kernel_matrix(train, test, {1.0, 0.1});
  REQUIRE(joint.order() == 2);
  REQUIRE(joint(0, 0) == Approx(1.1).margin(1e-15));
  REQUIRE(joint(0, 1) == Approx(1.0).margin(1e-15));
  REQUIRE(joint(1, 1) == Approx(1.0).margin(1e-15));
  // 2x2 eigenvalues (2.1 +- sqrt(0.01+4))/2 are both positive
  REQUIRE(oracle::min_eigenvalue(joint) > 0.0);

  const mka::Dataset ds = spread_dataset(10, 2, 5);
  const mka::Matrix tx = oracle::random_matrix(4, 2, 6);
  const mka::SymMatrix j2 = mka::joint_kernel_matrix(ds, tx, {1.0, 0.5});
  REQUIRE(j2.order() == 14);
  REQUIRE(oracle::min_eigenvalue(j2) >= -1e-10);
}

TEST_CASE("full GP closed forms") {
  // single training point, test at the same point: mean = y / (1 + noise)
  mka::Dataset train{mka::Matrix(1, 1), {2.0}};
  train.x(0, 0) = 1.5;
  mka::Matrix test(1, 1);
  test(0, 0) = 1.5;
  const mka::PredictionResult one = mka::full_gp_predict(train, test, {1.0, 0.25});
  REQUIRE(one.mean[0] == Approx(2.0 / 1.25).margin(1e-12));

  // interpolation limit: tiny noise, test set = train set
  const mka::Dataset ds = spread_dataset(10, 1, 8);
  const mka::PredictionResult interp = mka::full_gp_predict(ds, ds.x, {0.3, 1e-8});
  for (std::size_t i = 0; i < ds.size(); ++i)
    REQUIRE(interp.mean[i] == Approx(ds.y[i]).margin(1e-4));
}

TEST_CASE("full GP matches the EVD oracle") {
  const mka::Dataset ds = spread_dataset(20, 2, 11);
  const mka::Matrix tx = oracle::random_matrix(6, 2, 12);
  const mka::GpHyper hyper{1.2, 0.3};
  const mka::PredictionResult got = mka::full_gp_predict(ds, tx, hyper);
  const mka::PredictionResult expected = full_gp_oracle(ds, tx, hyper);
  REQUIRE(oracle::rel_diff(got.mean, expected.mean) < 1e-8);
  REQUIRE(oracle::rel_diff(got.variance, expected.variance) < 1e-8);
  for (double v : got.variance) {
    REQUIRE(v > 0.0);
    REQUIRE(v <= 1.0 + hyper.noise + 1e-12);
  }
}

TEST_CASE("SOR with all landmarks reproduces the full GP mean") {
  const mka::Dataset ds = spread_dataset(14, 1, 21);
  const mka::Matrix tx = oracle::random_matrix(5, 1, 22);
  const mka::GpHyper hyper{0.4, 0.2};
  std::vector<std::size_t> all(ds.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const mka::PredictionResult sor = mka::sor_predict(ds, tx, all, hyper);
  const mka::PredictionResult full = mka::full_gp_predict(ds, tx, hyper);
  REQUIRE(oracle::rel_diff(sor.mean, full.mean) < 1e-8);
}

TEST_CASE("SOR single-landmark case against the dense formula") {
  const mka::Dataset ds = spread_dataset(3, 1, 31);
  mka::Matrix tx(2, 1);
  tx(0, 0) = 0.5;
  tx(1, 0) = 3.0;
  const mka::GpHyper hyper{0.8, 0.1};
  const std::vector<std::size_t> lm{1};

  const Eigen::MatrixXd ki =
      oracle::to_eigen(mka::kernel_matrix(ds.x, ds.x, hyper)).col(1);  // n x 1
  const double w = 1.0 + 1e-10;  // k(x1,x1) plus the trace ridge
  const double inner = (ki.transpose() * ki)(0, 0) + hyper.noise * w;
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(ds.y.data(), 3);
  const Eigen::MatrixXd kt = oracle::to_eigen(mka::kernel_matrix(tx, ds.x, hyper)).col(1);

  const mka::PredictionResult got = mka::sor_predict(ds, tx, lm, hyper);
  for (std::size_t j = 0; j < 2; ++j) {
    const double mean = kt(static_cast<long>(j), 0) * (ki.col(0).dot(y)) / inner;
    const double var =
        hyper.noise + kt(static_cast<long>(j), 0) * kt(static_cast<long>(j), 0) / inner;
    REQUIRE(got.mean[j] == Approx(mean).margin(1e-10));
    REQUIRE(got.variance[j] == Approx(var).margin(1e-10));
  }

  REQUIRE_THROWS_AS(mka::sor_predict(ds, tx, {}, hyper), std::invalid_argument);
  REQUIRE_THROWS_AS(mka::sor_predict(ds, tx, {7}, hyper), std::invalid_argument);
}

TEST_CASE("landmark sampling is deterministic and valid") {
  const auto a = mka::sample_landmarks(50, 10, 9);
  const auto b = mka::sample_landmarks(50, 10, 9);
  REQUIRE(a == b);
  REQUIRE(a.size() == 10);
  for (std::size_t i = 0; i + 1 < a.size(); ++i) REQUIRE(a[i] < a[i + 1]);
  REQUIRE_THROWS_AS(mka::sample_landmarks(5, 6, 0), std::invalid_argument);
}

TEST_CASE("MKA-GP in the exact regime equals the full GP") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const std::size_t n = 24 + 8 * (seed % 3), p = 4 + seed % 4;
    const mka::Dataset ds = spread_dataset(n, 1, seed + 40);
    const mka::Matrix tx = oracle::random_matrix(p, 1, seed + 50);
    const mka::GpHyper hyper{0.5, 0.1};

    const mka::MkaConfig exact{1.0, 1, 16, seed, 1};  // gamma = 1, single stage
    const mka::PredictionResult got = mka::mka_gp_predict(ds, tx, hyper, exact);
    const mka::PredictionResult full = mka::full_gp_predict(ds, tx, hyper);
    REQUIRE(oracle::rel_diff(got.mean, full.mean) < 1e-6);
    REQUIRE(oracle::rel_diff(got.variance, full.variance) < 1e-6);
  }
}

TEST_CASE("MKA-GP input validation") {
  const mka::Dataset ds = spread_dataset(6, 1, 61);
  const mka::Matrix empty(0, 1);
  REQUIRE_THROWS_AS(mka::mka_gp_predict(ds, empty, {0.5, 0.1}, {0.5, 2, 4, 0, 64}),
                    std::invalid_argument);
}

TEST_CASE("smse formula") {
  REQUIRE(mka::smse({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) == 0.0);

  // predicting the test mean for every point gives exactly 1
  const std::vector<double> y{0.5, -1.0, 2.0, 4.0};
  const double mean = (0.5 - 1.0 + 2.0 + 4.0) / 4.0;
  REQUIRE(mka::smse({mean, mean, mean, mean}, y) == 1.0);

  // direct two-pass oracle on random vectors
  const std::vector<double> pred = oracle::random_vector(9, 71);
  const std::vector<double> targets = oracle::random_vector(9, 72);
  double tm = 0.0;
  for (double v : targets) tm += v;
  tm /= 9.0;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < 9; ++i) {
    num += (pred[i] - targets[i]) * (pred[i] - targets[i]) / 9.0;
    den += (targets[i] - tm) * (targets[i] - tm) / 9.0;
  }
  REQUIRE(mka::smse(pred, targets) == Approx(num / den).margin(1e-12));

  // invariant under adding a constant to both
  std::vector<double> pred_shift = pred, targets_shift = targets;
  for (double& v : pred_shift) v += 3.25;
  for (double& v : targets_shift) v += 3.25;
  REQUIRE(mka::smse(pred_shift, targets_shift) ==
          Approx(mka::smse(pred, targets)).margin(1e-12));

  REQUIRE_THROWS_AS(mka::smse({1.0, 2.0}, {5.0, 5.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(mka::smse({1.0}, {5.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(mka::smse({1.0, 2.0}, {5.0}), std::invalid_argument);
}

TEST_CASE("mnlp formula") {
  const double log_2pi = std::log(2.0 * 3.14159265358979323846);

  mka::PredictionResult perfect{{1.0, 2.0}, {1.0, 1.0}};
  REQUIRE(mka::mnlp(perfect, {1.0, 2.0}) == Approx(log_2pi).margin(1e-12));

  mka::PredictionResult off_by_one{{2.0, 3.0}, {1.0, 1.0}};
  REQUIRE(mka::mnlp(off_by_one, {1.0, 2.0}) == Approx(1.0 + log_2pi).margin(1e-12));

  // random case against a direct evaluation
  mka::PredictionResult pred{oracle::random_vector(7, 81), std::vector<double>(7)};
  for (std::size_t i = 0; i < 7; ++i) pred.variance[i] = 0.5 + i * 0.25;
  const std::vector<double> y = oracle::random_vector(7, 82);
  double expected = 0.0;
  for (std::size_t i = 0; i < 7; ++i) {
    const double e = pred.mean[i] - y[i];
    expected += (e * e / pred.variance[i] + std::log(pred.variance[i]) + log_2pi) / 7.0;
  }
  REQUIRE(mka::mnlp(pred, y) == Approx(expected).margin(1e-12));

  // monotone in squared error at fixed variance
  mka::PredictionResult worse = pred;
  worse.mean[0] = y[0] + 2.0 * std::abs(pred.mean[0] - y[0]) + 1.0;
  REQUIRE(mka::mnlp(worse, y) > mka::mnlp(pred, y));

  mka::PredictionResult bad{{1.0}, {0.0}};
  REQUIRE_THROWS_AS(mka::mnlp(bad, {1.0}), std::invalid_argument);

  // global-variance variant uses the test-output variance everywhere
  const std::vector<double> y2{1.0, 3.0};
  mka::PredictionResult pg{{1.0, 3.0}, {7.0, 9.0}};  // variances ignored in global mode
  REQUIRE(mka::mnlp(pg, y2, mka::MnlpVariance::global) ==
          Approx(std::log(1.0) + log_2pi).margin(1e-12));
}

TEST_CASE("hyperparameter validation") {
  REQUIRE_THROWS_AS((mka::GpHyper{-1.0, 0.1}.validate()), std::invalid_argument);
  REQUIRE_THROWS_AS((mka::GpHyper{1.0, -0.1}.validate()), std::invalid_argument);
  mka::Dataset bad{mka::Matrix(2, 1), {1.0}};
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
}
