#pragma once

#include <cstddef>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mka/factorization.hpp"

namespace mka {

/// JSON document for a factorization:
/// {n, stages:[{n_in, cluster_order, per_cluster:[{dim, core_size,
///  rotations:[[i,j,c,s],...]}], core_first, d_entries}], core: row-major}.
/// Integers round-trip bit-exact; reals are emitted as shortest
/// round-trip decimals and parse back to the same binary64 values.
inline nlohmann::json to_json(const MkaFactorization& f) {
  nlohmann::json doc;
  doc["n"] = f.n;
  doc["stages"] = nlohmann::json::array();
  for (const MkaStage& st : f.stages) {
    nlohmann::json js;
    js["n_in"] = st.n_in;
    js["cluster_order"] = st.cluster_order.ord();
    js["per_cluster"] = nlohmann::json::array();
    for (const auto& comp : st.per_cluster) {
      nlohmann::json jc;
      jc["dim"] = comp.rotation.dim();
      jc["core_size"] = comp.core_size;
      auto rots = nlohmann::json::array();
      for (const GivensRotation& g : comp.rotation.rotations())
        rots.push_back({g.i, g.j, g.c, g.s});
      jc["rotations"] = std::move(rots);
      js["per_cluster"].push_back(std::move(jc));
    }
    js["core_first"] = st.core_first.ord();
    js["d_entries"] = st.d_entries;
    doc["stages"].push_back(std::move(js));
  }
  const std::size_t d = f.core.order();
  std::vector<double> core;
  core.reserve(d * d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) core.push_back(f.core(i, j));
  doc["core"] = std::move(core);
  return doc;
}

inline MkaFactorization factorization_from_json(const nlohmann::json& doc) {
  auto fail = [](const std::string& what) -> std::runtime_error {
    return std::runtime_error("factorization_from_json: " + what);
  };
  MkaFactorization f;
  f.n = doc.at("n").get<std::size_t>();
  std::size_t expect_in = f.n;

  for (const auto& js : doc.at("stages")) {
    MkaStage st{0, Permutation::identity(0), {}, Permutation::identity(0), 0, {}};
    st.n_in = js.at("n_in").get<std::size_t>();
    if (st.n_in != expect_in) throw fail("stage input size does not chain");

    st.cluster_order = Permutation(js.at("cluster_order").get<std::vector<std::size_t>>());
    st.core_first = Permutation(js.at("core_first").get<std::vector<std::size_t>>());
    if (st.cluster_order.size() != st.n_in || st.core_first.size() != st.n_in)
      throw fail("permutation length mismatch");

    std::size_t dim_sum = 0, c_out = 0;
    std::vector<std::pair<std::size_t, std::size_t>> extents;  // offset, core_size per cluster
    for (const auto& jc : js.at("per_cluster")) {
      const auto dim = jc.at("dim").get<std::size_t>();
      const auto core_size = jc.at("core_size").get<std::size_t>();
      if (core_size < 1 || core_size > dim) throw fail("core_size out of range");
      extents.emplace_back(dim_sum, core_size);
      RotationSequence rot(dim);
      for (const auto& jr : jc.at("rotations")) {
        if (!jr.is_array() || jr.size() != 4) throw fail("rotation must be [i, j, c, s]");
        rot.push(GivensRotation(jr[0].get<std::size_t>(), jr[1].get<std::size_t>(),
                                jr[2].get<double>(), jr[3].get<double>()));
      }
      if (rot.count() != dim - core_size) throw fail("rotation count must equal dim - core_size");
      st.per_cluster.push_back(CoreDiagonalCompression{std::move(rot), core_size, {}, {}});
      dim_sum += dim;
      c_out += core_size;
    }
    if (dim_sum != st.n_in) throw fail("cluster dims do not add up to n_in");
    st.c_out = c_out;

    st.d_entries = js.at("d_entries").get<std::vector<double>>();
    if (st.d_entries.size() != st.n_in - st.c_out) throw fail("d_entries length mismatch");

    // core/wavelet index splits are recovered from the core-first permutation
    for (std::size_t k = 0; k < st.n_in; ++k) {
      const std::size_t src = st.core_first[k];
      std::size_t cluster = 0;
      while (cluster + 1 < extents.size() && extents[cluster + 1].first <= src) ++cluster;
      auto& comp = st.per_cluster[cluster];
      const std::size_t local = src - extents[cluster].first;
      if (k < c_out)
        comp.core_indices.push_back(local);
      else
        comp.wavelet_indices.push_back(local);
    }
    for (const auto& comp : st.per_cluster)
      if (comp.core_indices.size() != comp.core_size) throw fail("core_first disagrees with core sizes");

    expect_in = st.c_out;
    f.stages.push_back(std::move(st));
  }

  const auto core_values = doc.at("core").get<std::vector<double>>();
  if (core_values.size() != expect_in * expect_in) throw fail("core size mismatch");
  SymMatrix core(expect_in);
  for (std::size_t i = 0; i < expect_in; ++i)
    for (std::size_t j = i; j < expect_in; ++j) {
      const double v = core_values[i * expect_in + j];
      if (v != core_values[j * expect_in + i]) throw fail("core is not symmetric");
      core.set(i, j, v);
    }
  f.core = std::move(core);
  return f;
}

inline void save_factorization(const std::string& path, const MkaFactorization& f) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_factorization: cannot open " + path);
  out << to_json(f).dump(2) << '\n';
}

inline MkaFactorization load_factorization(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_factorization: cannot open " + path);
  nlohmann::json doc;
  in >> doc;
  return factorization_from_json(doc);
}

}  // namespace mka
