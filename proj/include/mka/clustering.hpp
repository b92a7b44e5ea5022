#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mka/matrix.hpp"
#include "mka/rng.hpp"

namespace mka {

struct ClusterConfig {
  std::size_t m_max = 16;
  std::uint64_t rng_seed = 0;
};

/// Disjoint cover of {0..n-1} by nonempty clusters.
class Partition {
 public:
  Partition(std::vector<std::vector<std::size_t>> clusters, std::size_t n)
      : clusters_(std::move(clusters)), n_(n) {
    std::vector<bool> seen(n_, false);
    std::size_t covered = 0;
    for (const auto& cluster : clusters_) {
      if (cluster.empty()) throw std::invalid_argument("Partition: empty cluster");
      for (std::size_t idx : cluster) {
        if (idx >= n_ || seen[idx])
          throw std::invalid_argument("Partition: clusters are not a disjoint cover");
        seen[idx] = true;
        ++covered;
      }
    }
    if (covered != n_) throw std::invalid_argument("Partition: clusters do not cover all indices");
  }

  std::size_t n() const { return n_; }
  std::size_t cluster_count() const { return clusters_.size(); }
  const std::vector<std::vector<std::size_t>>& clusters() const { return clusters_; }

  /// Concatenation of the clusters, i.e. the ord of the blocking permutation.
  std::vector<std::size_t> concatenated() const {
    std::vector<std::size_t> ord;
    ord.reserve(n_);
    for (const auto& cluster : clusters_) ord.insert(ord.end(), cluster.begin(), cluster.end());
    return ord;
  }

 private:
  std::vector<std::vector<std::size_t>> clusters_;
  std::size_t n_;
};

namespace detail {

struct ColumnGeometry {
  const SymMatrix& m;
  std::vector<double> norms;

  explicit ColumnGeometry(const SymMatrix& mat) : m(mat), norms(mat.order()) {
    for (std::size_t j = 0; j < mat.order(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < mat.order(); ++k) s += mat(k, j) * mat(k, j);
      norms[j] = std::sqrt(s);
    }
  }

  /// |<col_a, col_b>| / (||col_a|| ||col_b||); zero-norm columns score 0.
  double similarity(std::size_t a, std::size_t b) const {
    if (norms[a] <= 0.0 || norms[b] <= 0.0) return 0.0;
    double dot = 0.0;
    for (std::size_t k = 0; k < m.order(); ++k) dot += m(k, a) * m(k, b);
    return std::abs(dot) / (norms[a] * norms[b]);
  }
};

/// Best anchor for column j among `anchors`; strict > keeps the lowest-index
/// winner on ties, and zero-similarity columns land on the first anchor.
inline std::size_t assign_to_anchor(const ColumnGeometry& geo, std::size_t j,
                                    const std::vector<std::size_t>& anchors) {
  std::size_t best = 0;
  double best_sim = -1.0;
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    const double sim = geo.similarity(j, anchors[a]);
    if (sim > best_sim) {
      best_sim = sim;
      best = a;
    }
  }
  return best;
}

struct AnchoredCluster {
  std::size_t anchor;
  std::vector<std::size_t> members;
};

/// Splits an oversized member list into ceil(size/m_max) capacity-capped
/// clusters re-anchored inside it.
inline std::vector<AnchoredCluster> capacity_split(const ColumnGeometry& geo,
                                                   const std::vector<std::size_t>& members,
                                                   std::size_t m_max, rng::Engine& rng) {
  const std::size_t k = (members.size() + m_max - 1) / m_max;
  std::vector<std::size_t> picks = rng.sample_without_replacement(members.size(), k);
  std::vector<std::size_t> anchors(k);
  for (std::size_t t = 0; t < k; ++t) anchors[t] = members[picks[t]];
  std::sort(anchors.begin(), anchors.end());

  std::vector<AnchoredCluster> out(k);
  for (std::size_t t = 0; t < k; ++t) out[t].anchor = anchors[t];
  for (std::size_t j : members) {
    std::size_t best = k;  // first anchor with room is the fallback
    double best_sim = -1.0;
    for (std::size_t a = 0; a < k; ++a) {
      if (out[a].members.size() >= m_max) continue;
      const double sim = geo.similarity(j, anchors[a]);
      if (best == k || sim > best_sim) {
        best_sim = sim;
        best = a;
      }
    }
    out[best].members.push_back(j);
  }
  out.erase(std::remove_if(out.begin(), out.end(),
                           [](const AnchoredCluster& c) { return c.members.empty(); }),
            out.end());
  return out;
}

}  // namespace detail

/// Partitions the columns of M into clusters of size <= cfg.m_max by
/// anchor-based normalized-inner-product assignment, then splits oversized
/// clusters and merges undersized ones (below max(1, m_max/4)).
inline Partition cluster_columns(const SymMatrix& m, const ClusterConfig& cfg) {
  if (cfg.m_max == 0) throw std::invalid_argument("cluster_columns: m_max must be >= 1");
  const std::size_t n = m.order();
  const std::size_t p_target = (n + cfg.m_max - 1) / cfg.m_max;
  if (p_target <= 1) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return Partition({all}, n);
  }

  detail::ColumnGeometry geo(m);
  rng::Engine rng(cfg.rng_seed);

  std::vector<std::size_t> anchors = rng.sample_without_replacement(n, p_target);
  std::sort(anchors.begin(), anchors.end());

  std::vector<detail::AnchoredCluster> clusters(p_target);
  for (std::size_t a = 0; a < p_target; ++a) clusters[a].anchor = anchors[a];
  for (std::size_t j = 0; j < n; ++j)
    clusters[detail::assign_to_anchor(geo, j, anchors)].members.push_back(j);
  clusters.erase(std::remove_if(clusters.begin(), clusters.end(),
                                [](const detail::AnchoredCluster& c) { return c.members.empty(); }),
                 clusters.end());

  // split any cluster above m_max by re-anchoring within it
  std::vector<detail::AnchoredCluster> sized;
  for (auto& cluster : clusters) {
    if (cluster.members.size() <= cfg.m_max) {
      sized.push_back(std::move(cluster));
    } else {
      auto split = detail::capacity_split(geo, cluster.members, cfg.m_max, rng);
      for (auto& sub : split) sized.push_back(std::move(sub));
    }
  }
  std::sort(sized.begin(), sized.end(),
            [](const auto& a, const auto& b) { return a.anchor < b.anchor; });

  // merge clusters below the size floor into their most similar anchor,
  // refusing merges that would break the m_max cap
  const double floor_size = std::max(1.0, static_cast<double>(cfg.m_max) / 4.0);
  std::vector<bool> gone(sized.size(), false);
  auto merge_into_best = [&](std::size_t c) {
    std::size_t best = sized.size();
    double best_sim = -1.0;
    for (std::size_t t = 0; t < sized.size(); ++t) {
      if (t == c || gone[t]) continue;
      if (sized[t].members.size() + sized[c].members.size() > cfg.m_max) continue;
      const double sim = geo.similarity(sized[c].anchor, sized[t].anchor);
      if (sim > best_sim) {
        best_sim = sim;
        best = t;
      }
    }
    if (best == sized.size()) return false;
    auto& dst = sized[best].members;
    dst.insert(dst.end(), sized[c].members.begin(), sized[c].members.end());
    gone[c] = true;
    return true;
  };
  for (std::size_t c = 0; c < sized.size(); ++c) {
    if (gone[c] || static_cast<double>(sized[c].members.size()) >= floor_size) continue;
    merge_into_best(c);
  }

  // keep the clustering close to balanced: while more clusters remain than
  // ceil(n / m_max), fold the smallest one into its most similar neighbor
  std::size_t alive = 0;
  for (std::size_t c = 0; c < sized.size(); ++c) alive += gone[c] ? 0 : 1;
  while (alive > p_target) {
    std::vector<std::size_t> order;
    for (std::size_t c = 0; c < sized.size(); ++c)
      if (!gone[c]) order.push_back(c);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return sized[a].members.size() < sized[b].members.size();
    });
    bool merged = false;
    for (std::size_t c : order) {
      if (merge_into_best(c)) {
        merged = true;
        break;
      }
    }
    if (!merged) break;
    --alive;
  }

  std::vector<std::vector<std::size_t>> final_clusters;
  for (std::size_t c = 0; c < sized.size(); ++c) {
    if (gone[c]) continue;
    std::sort(sized[c].members.begin(), sized[c].members.end());
    final_clusters.push_back(std::move(sized[c].members));
  }
  return Partition(std::move(final_clusters), n);
}

}  // namespace mka
