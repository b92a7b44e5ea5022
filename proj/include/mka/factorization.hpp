#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mka/cholesky.hpp"
#include "mka/clustering.hpp"
#include "mka/compressor.hpp"
#include "mka/evd.hpp"
#include "mka/givens.hpp"
#include "mka/matrix.hpp"
#include "mka/parallel.hpp"

namespace mka {

struct MkaConfig {
  double gamma = 0.5;             // fraction of each cluster kept in the core
  std::size_t d_core_target = 1;  // stage loop stops once the core is this small
  std::size_t m_max = 16;         // cluster size cap
  std::uint64_t rng_seed = 0;     // stage l clusters with seed rng_seed ^ l
  std::size_t stage_cap = 64;

  void validate() const {
    if (!(gamma > 0.0) || gamma > 1.0)
      throw std::invalid_argument("MkaConfig: gamma must be in (0, 1]");
    if (d_core_target < 1) throw std::invalid_argument("MkaConfig: d_core_target must be >= 1");
    if (m_max < 1) throw std::invalid_argument("MkaConfig: m_max must be >= 1");
    if (stage_cap < 1) throw std::invalid_argument("MkaConfig: stage_cap must be >= 1");
    if (gamma == 1.0 && stage_cap != 1)
      throw std::invalid_argument("MkaConfig: gamma = 1 makes no progress; stage_cap must be 1");
  }
};

/// One stage of the telescoping factorization. The stage's orthogonal factor
/// is Q = P (sum of per-cluster rotations) C acting on R^{n_in}; the first
/// c_out output coordinates continue to the next stage, the rest are frozen
/// with diagonal values d_entries.
struct MkaStage {
  std::size_t n_in;
  Permutation cluster_order;  // C: blocks the matrix by cluster
  std::vector<CoreDiagonalCompression> per_cluster;
  Permutation core_first;  // P: moves every cluster core to the front
  std::size_t c_out;
  std::vector<double> d_entries;

  std::vector<std::size_t> cluster_offsets() const {
    std::vector<std::size_t> off(per_cluster.size() + 1, 0);
    for (std::size_t i = 0; i < per_cluster.size(); ++i)
      off[i + 1] = off[i] + per_cluster[i].rotation.dim();
    return off;
  }

  /// v <- P Qbar C v
  std::vector<double> apply_forward(const std::vector<double>& v) const {
    std::vector<double> w = cluster_order.apply(v);
    const auto off = cluster_offsets();
    for (std::size_t i = 0; i < per_cluster.size(); ++i)
      per_cluster[i].rotation.apply(w, off[i]);
    return core_first.apply(w);
  }

  /// v <- C^T Qbar^T P^T v
  std::vector<double> apply_inverse(const std::vector<double>& v) const {
    std::vector<double> w = core_first.apply_inverse(v);
    const auto off = cluster_offsets();
    for (std::size_t i = 0; i < per_cluster.size(); ++i)
      per_cluster[i].rotation.apply_transpose(w, off[i]);
    return cluster_order.apply_inverse(w);
  }
};

/// Output of the MKA stage loop: the telescoping factors and the final core.
struct MkaFactorization {
  std::size_t n = 0;
  std::vector<MkaStage> stages;
  SymMatrix core = SymMatrix(1);
};

struct StorageReport {
  std::size_t rotations_stored = 0;
  std::size_t d_values = 0;
  std::size_t core_values = 0;
  std::size_t total = 0;
  std::size_t bound = 0;  // (2s+1) n + d_core^2
};

/// Scalar spectral transform tag: identity, x^alpha, or exp(beta x).
class SpectralFunction {
 public:
  enum class Kind { identity, power, exponential };

  static SpectralFunction identity() { return SpectralFunction(Kind::identity, 0.0); }
  static SpectralFunction power(double alpha) { return SpectralFunction(Kind::power, alpha); }
  static SpectralFunction exponential(double beta) {
    return SpectralFunction(Kind::exponential, beta);
  }

  Kind kind() const { return kind_; }
  double param() const { return param_; }

  double operator()(double x) const {
    switch (kind_) {
      case Kind::identity:
        return x;
      case Kind::power:
        return std::pow(x, param_);
      case Kind::exponential:
        return std::exp(param_ * x);
    }
    return x;
  }

  /// Rejects eigenvalues outside the function's domain. h_norm is the largest
  /// absolute eigenvalue of the factored matrix.
  void check_eigenvalue(double lambda, double h_norm) const {
    if (kind_ != Kind::power) return;
    if (param_ < 0.0 && std::abs(lambda) < 1e-12 * h_norm)
      throw std::domain_error("mka_spectral: power(" + std::to_string(param_) +
                              ") is singular at eigenvalue " + std::to_string(lambda));
    if (param_ != std::floor(param_) && lambda < 0.0)
      throw std::domain_error("mka_spectral: power(" + std::to_string(param_) +
                              ") undefined at negative eigenvalue " + std::to_string(lambda));
  }

 private:
  SpectralFunction(Kind kind, double param) : kind_(kind), param_(param) {}

  Kind kind_;
  double param_;
};

namespace detail {

struct StageBuild {
  MkaStage stage;
  SymMatrix next_core;
};

inline StageBuild build_stage(const SymMatrix& current, const MkaConfig& cfg, std::size_t stage_no,
                              std::size_t threads) {
  const std::size_t n_in = current.order();
  const Partition partition =
      cluster_columns(current, ClusterConfig{cfg.m_max, cfg.rng_seed ^ stage_no});

  Permutation cluster_order(partition.concatenated());
  SymMatrix blocked = permute_sym(current, cluster_order);

  const std::size_t p = partition.cluster_count();
  std::vector<std::size_t> offsets(p + 1, 0);
  for (std::size_t i = 0; i < p; ++i)
    offsets[i + 1] = offsets[i] + partition.clusters()[i].size();

  std::vector<std::pair<CoreDiagonalCompression, CoreDiagonal>> compressed;
  compressed.reserve(p);
  for (std::size_t i = 0; i < p; ++i)
    compressed.emplace_back(CoreDiagonalCompression{RotationSequence(0), 0, {}, {}},
                            CoreDiagonal{0, SymMatrix(1), {}});
  parallel_for(p, threads, [&](std::size_t i) {
    const std::size_t len = offsets[i + 1] - offsets[i];
    compressed[i] = mmf_compress(blocked.block(offsets[i], len), cfg.gamma);
  });

  // Hbar = Qbar Kbar Qbar^T, applying every cluster's rotations to the full matrix
  for (std::size_t i = 0; i < p; ++i)
    for (const GivensRotation& g : compressed[i].first.rotation.rotations())
      conjugate_in_place(blocked, g, offsets[i]);

  std::vector<std::size_t> core_first_ord;
  core_first_ord.reserve(n_in);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t local : compressed[i].first.core_indices)
      core_first_ord.push_back(offsets[i] + local);
  const std::size_t c_out = core_first_ord.size();
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t local : compressed[i].first.wavelet_indices)
      core_first_ord.push_back(offsets[i] + local);

  Permutation core_first(std::move(core_first_ord));
  SymMatrix pre = permute_sym(blocked, core_first);

  std::vector<double> d_entries(n_in - c_out);
  for (std::size_t t = 0; t < d_entries.size(); ++t) d_entries[t] = pre(c_out + t, c_out + t);

  std::vector<CoreDiagonalCompression> per_cluster;
  per_cluster.reserve(p);
  for (auto& [comp, cd] : compressed) per_cluster.push_back(std::move(comp));

  return StageBuild{MkaStage{n_in, std::move(cluster_order), std::move(per_cluster),
                             std::move(core_first), c_out, std::move(d_entries)},
                    pre.block(0, c_out)};
}

}  // namespace detail

/// Runs the MKA stage loop (cluster, permute, compress, assemble, core-first
/// permute, truncate) until the core reaches cfg.d_core_target or stage_cap
/// stages have been built. Per-cluster compressions inside one stage may run
/// on `threads` threads (0 = all hardware threads) with identical results.
inline MkaFactorization mka_factorize(const SymMatrix& k, const MkaConfig& cfg,
                                      std::size_t threads = 1) {
  cfg.validate();
  MkaFactorization f;
  f.n = k.order();
  f.core = k;

  bool stalled = false;
  while (f.core.order() > cfg.d_core_target && f.stages.size() < cfg.stage_cap) {
    detail::StageBuild built = detail::build_stage(f.core, cfg, f.stages.size() + 1, threads);
    stalled = built.stage.c_out == built.stage.n_in;
    f.core = std::move(built.next_core);
    f.stages.push_back(std::move(built.stage));
  }
  if (cfg.gamma < 1.0 && stalled && f.core.order() > cfg.d_core_target)
    throw std::runtime_error(
        "mka_factorize: no progress (stage kept its full core; clusters too small to compress) "
        "after " +
        std::to_string(f.stages.size()) + " stages");
  return f;
}

/// K~ z through the telescoping form; never materializes K~.
inline std::vector<double> mka_apply(const MkaFactorization& f, const std::vector<double>& z) {
  if (z.size() != f.n) throw std::invalid_argument("mka_apply: length mismatch");
  const std::size_t s = f.stages.size();
  std::vector<std::vector<double>> tails(s);
  std::vector<double> v = z;
  for (std::size_t l = 0; l < s; ++l) {
    const MkaStage& st = f.stages[l];
    std::vector<double> w = st.apply_forward(v);
    tails[l].assign(w.begin() + static_cast<std::ptrdiff_t>(st.c_out), w.end());
    w.resize(st.c_out);
    v = std::move(w);
  }
  v = matvec(f.core, v);
  for (std::size_t l = s; l-- > 0;) {
    const MkaStage& st = f.stages[l];
    std::vector<double> w(st.n_in);
    std::copy(v.begin(), v.end(), w.begin());
    for (std::size_t t = 0; t < tails[l].size(); ++t)
      w[st.c_out + t] = st.d_entries[t] * tails[l][t];
    v = st.apply_inverse(w);
  }
  return v;
}

/// Dense expansion of the telescoping product (the oracle for mka_apply).
inline SymMatrix mka_reconstruct(const MkaFactorization& f) {
  SymMatrix m = f.core;
  for (std::size_t l = f.stages.size(); l-- > 0;) {
    const MkaStage& st = f.stages[l];
    SymMatrix h(st.n_in);
    for (std::size_t x = 0; x < st.c_out; ++x)
      for (std::size_t y = x; y < st.c_out; ++y) h.set(x, y, m(x, y));
    for (std::size_t t = 0; t < st.d_entries.size(); ++t)
      h.set(st.c_out + t, st.c_out + t, st.d_entries[t]);

    h = permute_sym(h, st.core_first.inverse());
    const auto off = st.cluster_offsets();
    for (std::size_t i = st.per_cluster.size(); i-- > 0;) {
      const auto& rots = st.per_cluster[i].rotation.rotations();
      for (std::size_t r = rots.size(); r-- > 0;)
        conjugate_in_place(h, rots[r].transposed(), off[i]);
    }
    m = permute_sym(h, st.cluster_order.inverse());
  }
  return m;
}

/// f(K~) in factored form: same rotations and permutations, core replaced by
/// V f(Lambda) V^T and every diagonal entry x by f(x).
inline MkaFactorization mka_spectral(const MkaFactorization& f, const SpectralFunction& fn) {
  const EvdResult evd = sym_evd(f.core);

  double h_norm = 0.0;
  for (double lambda : evd.eigvals) h_norm = std::max(h_norm, std::abs(lambda));
  for (const MkaStage& st : f.stages)
    for (double x : st.d_entries) h_norm = std::max(h_norm, std::abs(x));
  for (double lambda : evd.eigvals) fn.check_eigenvalue(lambda, h_norm);
  for (const MkaStage& st : f.stages)
    for (double x : st.d_entries) fn.check_eigenvalue(x, h_norm);

  MkaFactorization out = f;
  const std::size_t d = f.core.order();
  SymMatrix core(d);
  for (std::size_t x = 0; x < d; ++x)
    for (std::size_t y = x; y < d; ++y) {
      double sum = 0.0;
      for (std::size_t k = 0; k < d; ++k)
        sum += fn(evd.eigvals[k]) * evd.eigvecs(x, k) * evd.eigvecs(y, k);
      core.set(x, y, sum);
    }
  out.core = std::move(core);
  for (MkaStage& st : out.stages)
    for (double& x : st.d_entries) x = fn(x);
  return out;
}

/// Solves K~ x = b through the factored inverse.
inline std::vector<double> mka_solve(const MkaFactorization& f, const std::vector<double>& b) {
  return mka_apply(mka_spectral(f, SpectralFunction::power(-1.0)), b);
}

/// log det K~ = sum log eig(core) + sum log d; requires a positive spectrum.
inline double mka_logdet(const MkaFactorization& f) {
  const EvdResult evd = sym_evd(f.core);
  double sum = 0.0;
  auto accumulate = [&](double lambda) {
    if (lambda <= 0.0)
      throw std::domain_error("mka_logdet: non-positive eigenvalue " + std::to_string(lambda));
    sum += std::log(lambda);
  };
  for (double lambda : evd.eigvals) accumulate(lambda);
  for (const MkaStage& st : f.stages)
    for (double x : st.d_entries) accumulate(x);
  return sum;
}

/// Stored-value counts against the (2s+1) n + d_core^2 bound.
inline StorageReport mka_storage(const MkaFactorization& f) {
  StorageReport r;
  for (const MkaStage& st : f.stages) {
    for (const auto& comp : st.per_cluster) r.rotations_stored += comp.rotation.count();
    r.d_values += st.d_entries.size();
  }
  r.core_values = f.core.order() * f.core.order();
  r.total = 2 * r.rotations_stored + r.d_values + r.core_values;
  r.bound = (2 * f.stages.size() + 1) * f.n + f.core.order() * f.core.order();
  return r;
}

}  // namespace mka
