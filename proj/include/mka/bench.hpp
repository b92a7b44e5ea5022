#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mka/cholesky.hpp"
#include "mka/gp.hpp"
#include "mka/io.hpp"
#include "mka/metrics.hpp"
#include "mka/rng.hpp"

namespace mka::bench {

/// Loads a numeric CSV dataset; the last column is the target, an optional
/// single header line is auto-detected.
inline Dataset load_dataset(const std::string& path) {
  const io::NumericCsv csv = io::read_numeric_csv(path, true);
  if (csv.rows.empty()) throw std::runtime_error(path + ": no data rows");
  const std::size_t cols = csv.rows.front().size();
  if (cols < 2) throw std::runtime_error(path + ": need at least two columns (features, target)");
  Dataset ds{Matrix(csv.rows.size(), cols - 1), std::vector<double>(csv.rows.size())};
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    for (std::size_t j = 0; j + 1 < cols; ++j) ds.x(i, j) = csv.rows[i][j];
    ds.y[i] = csv.rows[i][cols - 1];
  }
  return ds;
}

inline void write_dataset_csv(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < ds.x.cols(); ++j) out << io::format_double(ds.x(i, j)) << ',';
    out << io::format_double(ds.y[i]) << '\n';
  }
}

/// Per-column means and population variances, for the inverse transform.
struct NormalizationStats {
  std::vector<double> x_mean, x_var;
  double y_mean = 0.0, y_var = 0.0;
};

/// Centers every feature column and the targets to mean zero and population
/// variance one; constant columns become all zeros (variance recorded as 0).
inline std::pair<Dataset, NormalizationStats> normalize(const Dataset& ds) {
  ds.validate();
  const std::size_t n = ds.size(), d = ds.x.cols();
  if (n < 2) throw std::invalid_argument("normalize: needs at least two rows");

  NormalizationStats stats;
  stats.x_mean.assign(d, 0.0);
  stats.x_var.assign(d, 0.0);
  Dataset out{Matrix(n, d), std::vector<double>(n)};

  auto column_stats = [n](auto&& get, double& mean, double& variance) {
    mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += get(i);
    mean /= static_cast<double>(n);
    variance = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dev = get(i) - mean;
      variance += dev * dev;
    }
    variance /= static_cast<double>(n);
  };

  for (std::size_t j = 0; j < d; ++j) {
    column_stats([&](std::size_t i) { return ds.x(i, j); }, stats.x_mean[j], stats.x_var[j]);
    const double scale = stats.x_var[j] > 0.0 ? 1.0 / std::sqrt(stats.x_var[j]) : 0.0;
    for (std::size_t i = 0; i < n; ++i) out.x(i, j) = (ds.x(i, j) - stats.x_mean[j]) * scale;
  }
  column_stats([&](std::size_t i) { return ds.y[i]; }, stats.y_mean, stats.y_var);
  const double yscale = stats.y_var > 0.0 ? 1.0 / std::sqrt(stats.y_var) : 0.0;
  for (std::size_t i = 0; i < n; ++i) out.y[i] = (ds.y[i] - stats.y_mean) * yscale;
  return {std::move(out), std::move(stats)};
}

inline Dataset select_rows(const Dataset& ds, const std::vector<std::size_t>& rows) {
  Dataset out{Matrix(rows.size(), ds.x.cols()), std::vector<double>(rows.size())};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < ds.x.cols(); ++j) out.x(i, j) = ds.x(rows[i], j);
    out.y[i] = ds.y[rows[i]];
  }
  return out;
}

/// Seed-deterministic split; the test side gets round(fraction * n) rows,
/// clamped to [1, n-1].
inline std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, double fraction,
                                                    std::uint64_t seed) {
  ds.validate();
  if (!(fraction > 0.0) || !(fraction < 1.0))
    throw std::invalid_argument("split_train_test: fraction must be in (0, 1)");
  const std::size_t n = ds.size();
  if (n < 2) throw std::invalid_argument("split_train_test: needs at least two rows");

  auto test_n = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  test_n = std::min(std::max<std::size_t>(test_n, 1), n - 1);

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  rng::Engine rng(seed);
  rng.shuffle(idx);

  std::vector<std::size_t> test(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(test_n));
  std::vector<std::size_t> train(idx.begin() + static_cast<std::ptrdiff_t>(test_n), idx.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {select_rows(ds, train), select_rows(ds, test)};
}

/// Seed-deterministic fold assignment: a shuffle cut into `folds` chunks whose
/// sizes differ by at most one.
inline std::vector<std::vector<std::size_t>> cv_folds(std::size_t n, std::size_t folds,
                                                      std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("cv_folds: needs at least two folds");
  if (folds > n) throw std::invalid_argument("cv_folds: more folds than rows");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  rng::Engine rng(seed);
  rng.shuffle(idx);
  std::vector<std::vector<std::size_t>> out(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t begin = f * n / folds, end = (f + 1) * n / folds;
    out[f].assign(idx.begin() + static_cast<std::ptrdiff_t>(begin),
                  idx.begin() + static_cast<std::ptrdiff_t>(end));
    std::sort(out[f].begin(), out[f].end());
  }
  return out;
}

struct HyperGrid {
  std::vector<double> lengthscales;
  std::vector<double> noises;
};

using Predictor =
    std::function<PredictionResult(const Dataset&, const Matrix&, const GpHyper&)>;

/// Grid search minimizing mean held-out-fold SMSE (mean MNLP breaks exact
/// ties, then first-in-grid order). Grid points whose folds throw are skipped;
/// if every point fails the last error is rethrown.
inline GpHyper cross_validate(const Dataset& train, const Predictor& predict,
                              const HyperGrid& grid, std::size_t folds, std::uint64_t seed) {
  train.validate();
  if (grid.lengthscales.empty() || grid.noises.empty())
    throw std::invalid_argument("cross_validate: empty grid");
  const auto fold_sets = cv_folds(train.size(), folds, seed);

  std::vector<std::vector<std::size_t>> fold_train(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    for (std::size_t g = 0; g < folds; ++g)
      if (g != f)
        fold_train[f].insert(fold_train[f].end(), fold_sets[g].begin(), fold_sets[g].end());
    std::sort(fold_train[f].begin(), fold_train[f].end());
  }

  bool found = false;
  GpHyper best;
  double best_smse = std::numeric_limits<double>::infinity();
  double best_mnlp = std::numeric_limits<double>::infinity();
  std::string last_error = "no grid point evaluated";

  for (double lengthscale : grid.lengthscales) {
    for (double noise : grid.noises) {
      const GpHyper hyper{lengthscale, noise};
      double smse_sum = 0.0, mnlp_sum = 0.0;
      try {
        for (std::size_t f = 0; f < folds; ++f) {
          const Dataset sub = select_rows(train, fold_train[f]);
          const Dataset held = select_rows(train, fold_sets[f]);
          const PredictionResult pred = predict(sub, held.x, hyper);
          smse_sum += smse(pred.mean, held.y);
          mnlp_sum += mnlp(pred, held.y);
        }
      } catch (const std::exception& e) {
        last_error = e.what();
        continue;
      }
      const double mean_smse = smse_sum / static_cast<double>(folds);
      const double mean_mnlp = mnlp_sum / static_cast<double>(folds);
      if (!found || mean_smse < best_smse ||
          (mean_smse == best_smse && mean_mnlp < best_mnlp)) {
        found = true;
        best = hyper;
        best_smse = mean_smse;
        best_mnlp = mean_mnlp;
      }
    }
  }
  if (!found)
    throw std::runtime_error("cross_validate: every grid point failed; last error: " + last_error);
  return best;
}

/// 1-d toy data: n inputs equally spaced on [0, 6], targets sampled from a
/// Gaussian-kernel GP (Cholesky of K + 1e-10 I) plus observation noise.
inline Dataset toy_generate(std::size_t n, const GpHyper& hyper, std::uint64_t seed) {
  hyper.validate();
  if (n < 2) throw std::invalid_argument("toy_generate: needs n >= 2");
  Dataset ds{Matrix(n, 1), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i)
    ds.x(i, 0) = 6.0 * static_cast<double>(i) / static_cast<double>(n - 1);

  const Matrix k = kernel_matrix(ds.x, ds.x, hyper);
  SymMatrix kr(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) kr.set(i, j, k(i, j) + (i == j ? 1e-10 : 0.0));
  const CholeskyFactor chol(kr);

  rng::Engine rng(seed);
  std::vector<double> g(n);
  for (double& v : g) v = rng.next_gaussian();
  const double sigma = std::sqrt(hyper.noise);
  const Matrix& lower = chol.lower();
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j <= i; ++j) s += lower(i, j) * g[j];
    ds.y[i] = s;
  }
  for (double& v : ds.y) v += sigma * rng.next_gaussian();
  return ds;
}

struct ToySpec {
  std::size_t n = 200;
  double lengthscale = 0.5;
  double noise = 0.01;
};

struct BenchConfig {
  std::string dataset_path;       // empty when toy is set
  std::optional<ToySpec> toy;
  std::vector<std::string> methods = {"full", "sor", "mka"};
  std::vector<std::size_t> d_core_list = {10};
  double gamma = 0.95;
  std::size_t m_max = 1u << 20;   // effectively single-cluster stages
  std::size_t stage_cap = 512;
  std::size_t cv_folds = 5;
  HyperGrid grid{{0.1, 0.25, 0.5, 1.0, 2.0, 4.0}, {0.01, 0.1, 0.5, 1.0}};
  double test_fraction = 0.1;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void validate() const {
    if (dataset_path.empty() == !toy.has_value())
      throw std::invalid_argument("BenchConfig: exactly one of dataset_path / toy is required");
    if (methods.empty()) throw std::invalid_argument("BenchConfig: no methods");
    for (const auto& m : methods)
      if (m != "full" && m != "sor" && m != "mka")
        throw std::invalid_argument("BenchConfig: unknown method '" + m + "'");
    if (cv_folds < 2) throw std::invalid_argument("BenchConfig: cv_folds must be >= 2");
    if (!(test_fraction > 0.0) || !(test_fraction < 1.0))
      throw std::invalid_argument("BenchConfig: test_fraction must be in (0, 1)");
    if (grid.lengthscales.empty() || grid.noises.empty())
      throw std::invalid_argument("BenchConfig: empty hyperparameter grid");
    const bool needs_d_core =
        std::find(methods.begin(), methods.end(), "sor") != methods.end() ||
        std::find(methods.begin(), methods.end(), "mka") != methods.end();
    if (needs_d_core && d_core_list.empty())
      throw std::invalid_argument("BenchConfig: d_core_list required for sor/mka");
  }
};

struct BenchRow {
  std::string method;
  std::size_t d_core = 0;
  double lengthscale = 0.0;
  double noise = 0.0;
  double smse = std::numeric_limits<double>::quiet_NaN();
  double mnlp = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0.0;
  std::uint64_t seed = 0;
  std::string error;  // empty on success
};

struct BenchReport {
  std::vector<BenchRow> rows;
};

namespace detail {

inline Predictor make_predictor(const std::string& method, std::size_t d_core,
                                const BenchConfig& cfg) {
  if (method == "full")
    return [](const Dataset& tr, const Matrix& te, const GpHyper& h) {
      return full_gp_predict(tr, te, h);
    };
  if (method == "sor") {
    const std::uint64_t lm_seed = cfg.seed ^ 0x50525eedULL;
    return [d_core, lm_seed](const Dataset& tr, const Matrix& te, const GpHyper& h) {
      return sor_predict(tr, te, sample_landmarks(tr.size(), d_core, lm_seed), h);
    };
  }
  MkaConfig mka_cfg{cfg.gamma, d_core, cfg.m_max, cfg.seed, cfg.stage_cap};
  const std::size_t threads = cfg.threads;
  return [mka_cfg, threads](const Dataset& tr, const Matrix& te, const GpHyper& h) {
    return mka_gp_predict(tr, te, h, mka_cfg, threads);
  };
}

}  // namespace detail

/// Per (method, d_core): five-fold CV for (lengthscale, noise) on the train
/// split, then one prediction on the held-out test split. Failed rows keep
/// their error text and the sweep continues.
inline BenchReport run_benchmark(const BenchConfig& cfg) {
  cfg.validate();
  Dataset raw = cfg.toy ? toy_generate(cfg.toy->n, GpHyper{cfg.toy->lengthscale, cfg.toy->noise},
                                       cfg.seed)
                        : load_dataset(cfg.dataset_path);
  auto [ds, stats] = normalize(raw);
  auto [train, test] = split_train_test(ds, cfg.test_fraction, cfg.seed);
  const std::uint64_t cv_seed = cfg.seed ^ 0xc5f01d5ULL;

  BenchReport report;
  for (const std::string& method : cfg.methods) {
    const std::vector<std::size_t> sweep =
        method == "full" ? std::vector<std::size_t>{train.size()} : cfg.d_core_list;
    for (std::size_t d_core : sweep) {
      BenchRow row;
      row.method = method;
      row.d_core = d_core;
      row.seed = cfg.seed;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const Predictor predict = detail::make_predictor(method, d_core, cfg);
        const GpHyper hyper = cross_validate(train, predict, cfg.grid, cfg.cv_folds, cv_seed);
        row.lengthscale = hyper.lengthscale;
        row.noise = hyper.noise;
        const PredictionResult pred = predict(train, test.x, hyper);
        row.smse = smse(pred.mean, test.y);
        row.mnlp = mnlp(pred, test.y);
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      row.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

inline nlohmann::json report_to_json(const BenchReport& report) {
  nlohmann::json doc;
  doc["rows"] = nlohmann::json::array();
  for (const BenchRow& r : report.rows) {
    nlohmann::json jr;
    jr["method"] = r.method;
    jr["d_core"] = r.d_core;
    jr["lengthscale"] = r.lengthscale;
    jr["noise"] = r.noise;
    jr["smse"] = std::isnan(r.smse) ? nlohmann::json() : nlohmann::json(r.smse);
    jr["mnlp"] = std::isnan(r.mnlp) ? nlohmann::json() : nlohmann::json(r.mnlp);
    jr["wall_ms"] = r.wall_ms;
    jr["seed"] = r.seed;
    jr["error"] = r.error.empty() ? nlohmann::json() : nlohmann::json(r.error);
    doc["rows"].push_back(std::move(jr));
  }
  return doc;
}

inline void write_report_json(const std::string& path, const BenchReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << report_to_json(report).dump(2) << '\n';
}

inline std::string sanitize_csv_field(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n') c = ';';
  return s;
}

inline void write_report_csv(const std::string& path, const BenchReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "method,d_core,lengthscale,noise,smse,mnlp,wall_ms,seed,error\n";
  for (const BenchRow& r : report.rows) {
    out << r.method << ',' << r.d_core << ',' << io::format_double(r.lengthscale) << ','
        << io::format_double(r.noise) << ',' << io::format_double(r.smse) << ','
        << io::format_double(r.mnlp) << ',' << io::format_double(r.wall_ms) << ',' << r.seed
        << ',' << sanitize_csv_field(r.error) << '\n';
  }
}

/// SMSE/MNLP-vs-d_core curves, one row per (method, d_core).
inline void write_plot_csv(const std::string& path, const BenchReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "method,d_core,smse,mnlp\n";
  for (const BenchRow& r : report.rows)
    out << r.method << ',' << r.d_core << ',' << io::format_double(r.smse) << ','
        << io::format_double(r.mnlp) << '\n';
}

inline BenchConfig config_from_json(const nlohmann::json& doc) {
  BenchConfig cfg;
  if (doc.contains("dataset")) cfg.dataset_path = doc.at("dataset").get<std::string>();
  if (doc.contains("toy")) {
    ToySpec toy;
    const auto& jt = doc.at("toy");
    if (jt.contains("n")) toy.n = jt.at("n").get<std::size_t>();
    if (jt.contains("lengthscale")) toy.lengthscale = jt.at("lengthscale").get<double>();
    if (jt.contains("noise")) toy.noise = jt.at("noise").get<double>();
    cfg.toy = toy;
  }
  if (doc.contains("methods")) cfg.methods = doc.at("methods").get<std::vector<std::string>>();
  if (doc.contains("d_core_list"))
    cfg.d_core_list = doc.at("d_core_list").get<std::vector<std::size_t>>();
  if (doc.contains("gamma")) cfg.gamma = doc.at("gamma").get<double>();
  if (doc.contains("m_max")) cfg.m_max = doc.at("m_max").get<std::size_t>();
  if (doc.contains("stage_cap")) cfg.stage_cap = doc.at("stage_cap").get<std::size_t>();
  if (doc.contains("cv_folds")) cfg.cv_folds = doc.at("cv_folds").get<std::size_t>();
  if (doc.contains("lengthscale_grid"))
    cfg.grid.lengthscales = doc.at("lengthscale_grid").get<std::vector<double>>();
  if (doc.contains("noise_grid")) cfg.grid.noises = doc.at("noise_grid").get<std::vector<double>>();
  if (doc.contains("test_fraction")) cfg.test_fraction = doc.at("test_fraction").get<double>();
  if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
  if (doc.contains("threads")) cfg.threads = doc.at("threads").get<std::size_t>();
  return cfg;
}

inline BenchConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  nlohmann::json doc;
  in >> doc;
  return config_from_json(doc);
}

}  // namespace mka::bench
