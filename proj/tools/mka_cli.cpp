// mka: multiresolution kernel approximation CLI.
// Subcommands: compress (factorize a kernel matrix CSV), gp (predict with
// full GP, SOR, or MKA-GP), toy (generate 1-d toy data), bench (SMSE/MNLP
// sweep). Exit codes: 0 success, 1 usage error, 2 runtime/numeric error.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "mka/mka.hpp"

namespace {

std::size_t threads_from_env(std::size_t flag_value, bool flag_set) {
  if (flag_set) return flag_value;
  if (const char* env = std::getenv("MKA_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end && *end == '\0') return static_cast<std::size_t>(v);
  }
  return flag_value;
}

void echo_seed(std::uint64_t seed) { std::cerr << "seed: " << seed << "\n"; }

mka::SymMatrix read_sym_csv(const std::string& path) {
  const mka::Matrix m = mka::io::read_matrix_csv(path);
  if (m.rows() != m.cols())
    throw std::runtime_error(path + ": matrix is not square (" + std::to_string(m.rows()) + "x" +
                             std::to_string(m.cols()) + ")");
  double scale = 0.0;
  for (double v : m.data()) scale = std::max(scale, std::abs(v));
  return mka::SymMatrix::from_matrix(m, 1e-9 * std::max(1.0, scale));
}

struct CompressArgs {
  std::string input, out;
  double gamma = 0.5;
  std::size_t d_core = 1;
  std::size_t m_max = 16;
  std::size_t stage_cap = 64;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool threads_set = false;
};

int run_compress(const CompressArgs& args) {
  echo_seed(args.seed);
  const mka::SymMatrix k = read_sym_csv(args.input);
  const mka::MkaConfig cfg{args.gamma, args.d_core, args.m_max, args.seed, args.stage_cap};
  const mka::MkaFactorization f =
      mka::mka_factorize(k, cfg, threads_from_env(args.threads, args.threads_set));
  const mka::StorageReport r = mka::mka_storage(f);
  std::cout << "n: " << f.n << "\n"
            << "stages: " << f.stages.size() << "\n"
            << "d_core: " << f.core.order() << "\n"
            << "rotations_stored: " << r.rotations_stored << "\n"
            << "d_values: " << r.d_values << "\n"
            << "core_values: " << r.core_values << "\n"
            << "total: " << r.total << "\n"
            << "bound: " << r.bound << "\n";
  if (!args.out.empty()) mka::save_factorization(args.out, f);
  return 0;
}

struct GpArgs {
  std::string train, test, method = "full", out;
  double lengthscale = 1.0;
  double noise = 0.1;
  std::size_t d_core = 10;
  double gamma = 0.95;
  std::size_t m_max = 1u << 20;
  std::size_t stage_cap = 512;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool threads_set = false;
};

int run_gp(const GpArgs& args) {
  echo_seed(args.seed);
  const mka::Dataset train = mka::bench::load_dataset(args.train);

  // the test file either matches the train column count (targets in the last
  // column) or has one column less (features only)
  const mka::io::NumericCsv csv = mka::io::read_numeric_csv(args.test, true);
  if (csv.rows.empty()) throw std::runtime_error(args.test + ": no data rows");
  const std::size_t cols = csv.rows.front().size();
  const std::size_t want = train.x.cols();
  bool has_targets;
  if (cols == want + 1) {
    has_targets = true;
  } else if (cols == want) {
    has_targets = false;
  } else {
    throw std::runtime_error(args.test + ": expected " + std::to_string(want) + " or " +
                             std::to_string(want + 1) + " columns, found " + std::to_string(cols));
  }
  mka::Matrix test_x(csv.rows.size(), want);
  std::vector<double> test_y;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    for (std::size_t j = 0; j < want; ++j) test_x(i, j) = csv.rows[i][j];
    if (has_targets) test_y.push_back(csv.rows[i][cols - 1]);
  }

  const mka::GpHyper hyper{args.lengthscale, args.noise};
  const std::size_t threads = threads_from_env(args.threads, args.threads_set);
  mka::PredictionResult pred;
  if (args.method == "full") {
    pred = mka::full_gp_predict(train, test_x, hyper);
  } else if (args.method == "sor") {
    pred = mka::sor_predict(train, test_x,
                            mka::sample_landmarks(train.size(), args.d_core, args.seed), hyper);
  } else {
    const mka::MkaConfig cfg{args.gamma, args.d_core, args.m_max, args.seed, args.stage_cap};
    pred = mka::mka_gp_predict(train, test_x, hyper, cfg, threads);
  }

  if (!args.out.empty()) {
    std::ofstream out(args.out);
    if (!out) throw std::runtime_error("cannot open " + args.out + " for writing");
    for (std::size_t j = 0; j < pred.mean.size(); ++j)
      out << mka::io::format_double(pred.mean[j]) << ','
          << mka::io::format_double(pred.variance[j]) << '\n';
  }
  if (has_targets) {
    std::cout << "smse: " << mka::io::format_double(mka::smse(pred.mean, test_y)) << "\n";
    std::cout << "mnlp: " << mka::io::format_double(mka::mnlp(pred, test_y)) << "\n";
  }
  return 0;
}

struct ToyArgs {
  std::size_t n = 200;
  double lengthscale = 0.5;
  double noise = 0.01;
  std::uint64_t seed = 0;
  std::string out;
};

int run_toy(const ToyArgs& args) {
  echo_seed(args.seed);
  const mka::Dataset ds =
      mka::bench::toy_generate(args.n, mka::GpHyper{args.lengthscale, args.noise}, args.seed);
  mka::bench::write_dataset_csv(args.out, ds);
  return 0;
}

struct BenchArgs {
  std::string config;
  std::string out_json, out_csv, plot_csv;
  // flag overrides; only applied when set on the command line
  double gamma = 0.0;
  std::uint64_t seed = 0;
  double test_fraction = 0.0;
  std::size_t m_max = 0, cv_folds = 0, threads = 0;
  bool gamma_set = false, seed_set = false, fraction_set = false, m_max_set = false,
       folds_set = false, threads_set = false;
};

int run_bench(const BenchArgs& args) {
  mka::bench::BenchConfig cfg = mka::bench::load_config(args.config);
  if (args.gamma_set) cfg.gamma = args.gamma;
  if (args.seed_set) cfg.seed = args.seed;
  if (args.fraction_set) cfg.test_fraction = args.test_fraction;
  if (args.m_max_set) cfg.m_max = args.m_max;
  if (args.folds_set) cfg.cv_folds = args.cv_folds;
  cfg.threads = threads_from_env(args.threads_set ? args.threads : cfg.threads, args.threads_set);
  echo_seed(cfg.seed);

  const mka::bench::BenchReport report = mka::bench::run_benchmark(cfg);
  for (const auto& row : report.rows) {
    std::cout << row.method << " d_core=" << row.d_core;
    if (row.error.empty())
      std::cout << " lengthscale=" << row.lengthscale << " noise=" << row.noise
                << " smse=" << row.smse << " mnlp=" << row.mnlp;
    else
      std::cout << " error: " << row.error;
    std::cout << "\n";
  }
  if (!args.out_json.empty()) mka::bench::write_report_json(args.out_json, report);
  if (!args.out_csv.empty()) mka::bench::write_report_csv(args.out_csv, report);
  if (!args.plot_csv.empty()) mka::bench::write_plot_csv(args.plot_csv, report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiresolution kernel approximation for GP regression"};
  app.require_subcommand(1);

  CompressArgs compress;
  auto* cmd_compress = app.add_subcommand("compress", "Factorize a kernel matrix CSV");
  cmd_compress->add_option("--input", compress.input, "Square symmetric matrix CSV")->required();
  cmd_compress->add_option("--gamma", compress.gamma, "Compression ratio in (0,1]");
  cmd_compress->add_option("--d-core", compress.d_core, "Target core size")->required();
  cmd_compress->add_option("--m-max", compress.m_max, "Cluster size cap");
  cmd_compress->add_option("--stage-cap", compress.stage_cap, "Stage cap");
  cmd_compress->add_option("--seed", compress.seed, "RNG seed (default 0)");
  cmd_compress->add_option("--out", compress.out, "Write the factorization JSON here");
  auto* copt = cmd_compress->add_option("--threads", compress.threads,
                                        "Concurrent cluster compressions (0 = auto)");
  cmd_compress->callback([&] { compress.threads_set = copt->count() > 0; });

  GpArgs gp;
  auto* cmd_gp = app.add_subcommand("gp", "GP regression (full | sor | mka)");
  cmd_gp->add_option("--train", gp.train, "Training dataset CSV (last column = target)")
      ->required();
  cmd_gp->add_option("--test", gp.test, "Test CSV (targets optional)")->required();
  cmd_gp->add_option("--method", gp.method, "full | sor | mka")
      ->check(CLI::IsMember({"full", "sor", "mka"}));
  cmd_gp->add_option("--lengthscale", gp.lengthscale, "Kernel length scale")->required();
  cmd_gp->add_option("--noise", gp.noise, "Observation noise variance")->required();
  cmd_gp->add_option("--d-core", gp.d_core, "Core size (mka) / landmark count (sor)");
  cmd_gp->add_option("--gamma", gp.gamma, "Compression ratio (mka)");
  cmd_gp->add_option("--m-max", gp.m_max, "Cluster size cap (mka)");
  cmd_gp->add_option("--stage-cap", gp.stage_cap, "Stage cap (mka)");
  cmd_gp->add_option("--seed", gp.seed, "RNG seed (default 0)");
  cmd_gp->add_option("--out", gp.out, "Predictions CSV (mean,variance rows)");
  auto* gopt = cmd_gp->add_option("--threads", gp.threads, "Threads (0 = auto)");
  cmd_gp->callback([&] { gp.threads_set = gopt->count() > 0; });

  ToyArgs toy;
  auto* cmd_toy = app.add_subcommand("toy", "Generate 1-d toy data on [0, 6]");
  cmd_toy->add_option("--n", toy.n, "Number of points")->required();
  cmd_toy->add_option("--lengthscale", toy.lengthscale, "Kernel length scale")->required();
  cmd_toy->add_option("--noise", toy.noise, "Observation noise variance")->required();
  cmd_toy->add_option("--seed", toy.seed, "RNG seed (default 0)");
  cmd_toy->add_option("--out", toy.out, "Output dataset CSV")->required();

  BenchArgs bench;
  auto* cmd_bench = app.add_subcommand("bench", "SMSE/MNLP benchmark sweep");
  cmd_bench->add_option("--config", bench.config, "BenchConfig JSON")->required();
  cmd_bench->add_option("--out-json", bench.out_json, "Report JSON path");
  cmd_bench->add_option("--out-csv", bench.out_csv, "Report CSV path");
  cmd_bench->add_option("--plot-csv", bench.plot_csv, "Plot-data CSV path");
  auto* bg = cmd_bench->add_option("--gamma", bench.gamma, "Override gamma");
  auto* bs = cmd_bench->add_option("--seed", bench.seed, "Override seed");
  auto* bf = cmd_bench->add_option("--test-fraction", bench.test_fraction, "Override split");
  auto* bm = cmd_bench->add_option("--m-max", bench.m_max, "Override m_max");
  auto* bk = cmd_bench->add_option("--cv-folds", bench.cv_folds, "Override folds");
  auto* bt = cmd_bench->add_option("--threads", bench.threads, "Threads (0 = auto)");
  cmd_bench->callback([&] {
    bench.gamma_set = bg->count() > 0;
    bench.seed_set = bs->count() > 0;
    bench.fraction_set = bf->count() > 0;
    bench.m_max_set = bm->count() > 0;
    bench.folds_set = bk->count() > 0;
    bench.threads_set = bt->count() > 0;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*cmd_compress) return run_compress(compress);
    if (*cmd_gp) return run_gp(gp);
    if (*cmd_toy) return run_toy(toy);
    if (*cmd_bench) return run_bench(bench);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
