#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "mka/compressor.hpp"
#include "oracles.hpp"

using Catch::Approx;

namespace {

// Dense-oracle Frobenius error ||A - Q^T H Q||_F computed entirely in Eigen
// from the stored rotation quadruples.
double dense_error(const mka::SymMatrix& a, const mka::CoreDiagonalCompression& comp,
                   const mka::CoreDiagonal& h) {
  const long m = static_cast<long>(a.order());
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(m, m);
  for (const mka::GivensRotation& g : comp.rotation.rotations()) {
    Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(m, m);
    rot(static_cast<long>(g.i), static_cast<long>(g.i)) = g.c;
    rot(static_cast<long>(g.i), static_cast<long>(g.j)) = g.s;
    rot(static_cast<long>(g.j), static_cast<long>(g.i)) = -g.s;
    rot(static_cast<long>(g.j), static_cast<long>(g.j)) = g.c;
    q = rot * q;
  }
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t x = 0; x < h.c; ++x)
    for (std::size_t y = 0; y < h.c; ++y)
      full(static_cast<long>(comp.core_indices[x]), static_cast<long>(comp.core_indices[y])) =
          h.core(x, y);
  for (std::size_t t = 0; t < h.tail.size(); ++t) {
    const long w = static_cast<long>(comp.wavelet_indices[t]);
    full(w, w) = h.tail[t];
  }
  return (oracle::to_eigen(a) - q.transpose() * full * q).norm();
}

}  // namespace

TEST_CASE("rotation count and core size follow the gamma formula") {
  for (std::size_t m : {1u, 2u, 3u, 5u, 8u, 13u}) {
    for (double gamma : {0.25, 0.5, 0.75, 1.0}) {
      const auto [comp, h] = mka::mmf_compress(oracle::random_spsd(m, m), gamma);
      const auto expected = static_cast<std::size_t>(std::floor((1.0 - gamma) * m));
      REQUIRE(comp.rotation.count() == expected);
      REQUIRE(comp.core_size == m - expected);
      REQUIRE(h.c == comp.core_size);
      REQUIRE(h.tail.size() == expected);

      // core and wavelet indices split {0..m-1}
      std::set<std::size_t> all(comp.core_indices.begin(), comp.core_indices.end());
      all.insert(comp.wavelet_indices.begin(), comp.wavelet_indices.end());
      REQUIRE(all.size() == m);
      REQUIRE(*all.rbegin() == m - 1);
    }
  }
  REQUIRE(mka::mmf_compress(oracle::random_spsd(8, 0), 0.5).first.rotation.count() == 4);
}

TEST_CASE("gamma = 1 keeps the matrix exactly") {
  const mka::SymMatrix a = oracle::random_sym(6, 3);
  const auto [comp, h] = mka::mmf_compress(a, 1.0);
  REQUIRE(comp.rotation.count() == 0);
  REQUIRE(h.c == 6);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) REQUIRE(h.core(i, j) == a(i, j));
  REQUIRE(mka::compression_error(a, comp, h) == 0.0);
}

TEST_CASE("rank-1 2x2 compresses exactly with one 45-degree rotation") {
  mka::SymMatrix a(2);
  a.set(0, 0, 1.0);
  a.set(0, 1, 1.0);
  a.set(1, 1, 1.0);
  const auto [comp, h] = mka::mmf_compress(a, 0.5);
  REQUIRE(comp.rotation.count() == 1);
  const mka::GivensRotation& g = comp.rotation.rotations().front();
  REQUIRE(std::abs(g.c) == Approx(std::sqrt(2.0) / 2.0).margin(1e-12));
  REQUIRE(std::abs(g.s) == Approx(std::sqrt(2.0) / 2.0).margin(1e-12));
  REQUIRE(h.c == 1);
  REQUIRE(h.core(0, 0) == Approx(2.0).margin(1e-12));
  REQUIRE(h.tail.front() == Approx(0.0).margin(1e-12));
  REQUIRE(mka::compression_error(a, comp, h) < 1e-12);
}

TEST_CASE("diagonal input compresses exactly at any gamma") {
  mka::SymMatrix a(5);
  for (std::size_t i = 0; i < 5; ++i) a.set(i, i, static_cast<double>(i) - 1.5);
  for (double gamma : {0.2, 0.4, 0.6, 1.0}) {
    const auto [comp, h] = mka::mmf_compress(a, gamma);
    REQUIRE(mka::compression_error(a, comp, h) < 1e-12);
  }
}

TEST_CASE("compression_error equals the dense oracle") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const mka::SymMatrix a = oracle::random_spsd(8, seed);
    const auto [comp, h] = mka::mmf_compress(a, 0.5);
    const double got = mka::compression_error(a, comp, h);
    REQUIRE(got == Approx(dense_error(a, comp, h)).margin(1e-12));
  }
}

TEST_CASE("spsd inputs keep an spsd core and nonnegative tail") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const std::size_t m = 4 + seed % 9;
    const mka::SymMatrix a = oracle::random_spsd(m, seed + 40);
    const auto [comp, h] = mka::mmf_compress(a, 0.5);
    REQUIRE(oracle::min_eigenvalue(h.core) >= -1e-10 * a.frobenius_norm());
    for (double t : h.tail) REQUIRE(t >= -1e-10 * a.frobenius_norm());
  }
}

TEST_CASE("error is non-increasing in gamma") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    const mka::SymMatrix a = oracle::random_spsd(12, seed + 70);
    double prev = std::numeric_limits<double>::infinity();
    for (double gamma : {0.25, 0.5, 0.75, 1.0}) {
      const auto [comp, h] = mka::mmf_compress(a, gamma);
      const double err = mka::compression_error(a, comp, h);
      REQUIRE(err <= prev + 1e-12);
      prev = err;
    }
  }
}

TEST_CASE("input validation") {
  const mka::SymMatrix a = oracle::random_spsd(4, 1);
  REQUIRE_THROWS_AS(mka::mmf_compress(a, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(mka::mmf_compress(a, -0.5), std::invalid_argument);
  REQUIRE_THROWS_AS(mka::mmf_compress(a, 1.5), std::invalid_argument);

  const auto [comp, h] = mka::mmf_compress(a, 0.5);
  const mka::SymMatrix wrong = oracle::random_spsd(5, 2);
  REQUIRE_THROWS_AS(mka::compression_error(wrong, comp, h), std::invalid_argument);
}
