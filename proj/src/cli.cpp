#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rdpg/chernoff.hpp"
#include "rdpg/cli_io.hpp"
#include "rdpg/embedding.hpp"
#include "rdpg/errors.hpp"
#include "rdpg/limit_laws.hpp"
#include "rdpg/mc_harness.hpp"
#include "rdpg/model.hpp"

#ifndef RDPG_VERSION
#define RDPG_VERSION "0.0.0"
#endif

namespace rdpg {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Like format_double but always shows a decimal point for whole numbers.
std::string display(double value) {
  std::string text = format_double(value);
  if (text.find_first_of(".eEn") == std::string::npos) text += ".0";
  return text;
}

std::string display(const Vector& v) {
  std::string text = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) text += ", ";
    text += display(v(i));
  }
  return text + "]";
}

std::string display(const Matrix& m) {
  std::string text = "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i) text += "; ";
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) text += " ";
      text += display(m(i, j));
    }
  }
  return text + "]";
}

OutputFormat parse_format(const std::string& text) {
  if (text == "csv") return OutputFormat::Csv;
  if (text == "json") return OutputFormat::Json;
  throw InvalidConfig("format", "expected csv or json");
}

/// Writes the data file, any failures, and a manifest listing all of them.
void finish(const Table& table, const std::vector<ReplicateFailure>& failures,
            RunManifest manifest, const std::string& out, OutputFormat format,
            Clock::time_point start) {
  manifest.outputs.push_back(out);
  if (!failures.empty()) manifest.outputs.push_back(out + ".failures.csv");
  if (format == OutputFormat::Csv) manifest.outputs.push_back(out + ".manifest.json");
  manifest.wall_seconds = seconds_since(start);

  write_results(table, manifest, out, format);
  if (!failures.empty()) {
    write_results(to_table(failures), manifest, out + ".failures.csv", OutputFormat::Csv);
    std::cerr << failures.size() << " replicate(s) failed; see " << out
              << ".failures.csv\n";
  }
  if (format == OutputFormat::Csv) {
    std::ofstream m(out + ".manifest.json");
    m << manifest.to_json().dump(2) << '\n';
    if (!m) throw std::runtime_error("failed writing '" + out + ".manifest.json'");
  }
  for (const std::string& path : manifest.outputs) std::cout << path << '\n';
}

// Headerless, so read_matrix_csv and other tools can load it directly.
void write_matrix_csv(const Matrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << "\r\n";
  }
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  std::string joined;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    joined += line;
    joined += ';';
  }
  return parse_matrix(joined, "adjacency");
}

std::vector<std::string> numbered(const std::string& prefix, Eigen::Index count) {
  std::vector<std::string> names;
  for (Eigen::Index i = 1; i <= count; ++i) names.push_back(prefix + std::to_string(i));
  return names;
}

/// Options shared by the Monte Carlo subcommands.
struct ExperimentFlags {
  std::string config_path;
  std::vector<int> n;
  std::optional<int> replicates;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<int> restarts;
  std::optional<int> oracle_samples;
  std::string out;
  std::string format = "csv";

  void attach(CLI::App& app, bool needs_out) {
    app.add_option("--config,--model", config_path, "INI experiment file")->required();
    app.add_option("--n", n, "Override the list of graph sizes");
    app.add_option("--replicates", replicates);
    app.add_option("--seed", seed, "Base seed (required here or in the config)");
    app.add_option("--threads", threads, "Worker threads, 0 for all cores");
    app.add_option("--restarts", restarts);
    app.add_option("--oracle-samples", oracle_samples);
    if (needs_out) {
      app.add_option("--out", out, "Output file")->required();
      app.add_option("--format", format, "csv or json");
    }
  }

  ExperimentConfig resolve(bool seed_required = true) const {
    LoadedExperiment loaded = load_experiment_config(config_path);
    ExperimentConfig& c = loaded.config;
    if (!n.empty()) c.n_values = n;
    if (replicates) c.replicates = *replicates;
    if (threads) c.threads = *threads;
    if (restarts) c.restarts = *restarts;
    if (oracle_samples) c.oracle_samples = *oracle_samples;
    if (seed) {
      c.base_seed = *seed;
    } else if (!loaded.seed_given && seed_required) {
      throw InvalidConfig("seed", "no seed given; pass --seed or set experiment.seed");
    }
    c.validate();
    return c;
  }
};

RunManifest manifest_for(const ExperimentConfig& c) {
  RunManifest m;
  m.config = config_to_json(c);
  m.version = RDPG_VERSION;
  m.base_seed = c.base_seed;
  return m;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Spectral embeddings of random dot product graphs"};
  app.set_version_flag("--version", RDPG_VERSION);
  app.require_subcommand(1);

  ExperimentFlags exp;
  std::function<void()> action;
  const auto start = Clock::now();

  // sample
  auto* sample = app.add_subcommand("sample", "Draw latent positions and a graph");
  ExperimentFlags sample_flags;
  std::string sample_prefix;
  sample_flags.attach(*sample, false);
  sample->add_option("--out", sample_prefix, "Output prefix")->required();
  sample->callback([&] {
    action = [&] {
      ExperimentConfig c = sample_flags.resolve();
      const int n = c.n_values.front();
      const MixtureOfPointMasses f = c.mixture();
      const RdpgSample s = sample_rdpg(f, n, c.sparsity, c.base_seed);
      RunManifest manifest = manifest_for(c);
      manifest.config["n"] = n;
      const std::string adjacency = sample_prefix + "_adjacency.csv";
      const std::string latents = sample_prefix + "_latents.csv";
      const std::string manifest_path = sample_prefix + "_manifest.json";
      write_matrix_csv(s.adjacency, adjacency);
      Table table{{"vertex", "block"}, {}};
      for (const std::string& name : numbered("x", f.dim())) table.columns.push_back(name);
      for (int i = 0; i < n; ++i) {
        std::vector<Cell> row{std::int64_t{i + 1}, std::int64_t{s.labels[i] + 1}};
        for (int j = 0; j < f.dim(); ++j) row.emplace_back(s.latents(i, j));
        table.rows.push_back(std::move(row));
      }
      write_results(table, manifest, latents, OutputFormat::Csv);
      manifest.outputs = {adjacency, latents, manifest_path};
      manifest.wall_seconds = seconds_since(start);
      std::ofstream m(manifest_path);
      m << manifest.to_json().dump(2) << '\n';
      if (!m) throw std::runtime_error("failed writing '" + manifest_path + "'");
      for (const std::string& p : manifest.outputs) std::cout << p << '\n';
    };
  });

  // embed
  auto* embed_cmd = app.add_subcommand("embed", "Embed an adjacency matrix");
  std::string embed_in, embed_out, embed_method = "ase";
  int embed_dim = 0;
  embed_cmd->add_option("--adjacency", embed_in, "CSV adjacency matrix, no header")
      ->required();
  embed_cmd->add_option("--dim", embed_dim)->required();
  embed_cmd->add_option("--method", embed_method, "ase or lse");
  embed_cmd->add_option("--out", embed_out)->required();
  embed_cmd->callback([&] {
    action = [&] {
      Method method;
      if (embed_method == "ase") {
        method = Method::Ase;
      } else if (embed_method == "lse") {
        method = Method::Lse;
      } else {
        throw InvalidConfig("method", "expected ase or lse");
      }
      const Matrix a = read_matrix_csv(embed_in);
      if (a.rows() != a.cols()) throw InvalidConfig("adjacency", "matrix is not square");
      if (embed_dim < 1 || embed_dim > a.rows()) throw InvalidConfig("dim", "must lie in 1..n");
      const Embedding e = embed(a, embed_dim, method);
      RunManifest manifest;
      manifest.config = {{"adjacency", embed_in}, {"dim", embed_dim},
                         {"method", embed_method}};
      manifest.version = RDPG_VERSION;
      Table table{numbered("x", embed_dim), {}};
      for (Eigen::Index i = 0; i < e.rows.rows(); ++i) {
        std::vector<Cell> row;
        for (Eigen::Index j = 0; j < e.rows.cols(); ++j) row.emplace_back(e.rows(i, j));
        table.rows.push_back(std::move(row));
      }
      finish(table, {}, manifest, embed_out, OutputFormat::Csv, start);
    };
  });

  // clt-check, frobenius-check, cluster-experiment
  auto* clt = app.add_subcommand("clt-check", "Row covariance against the limit law");
  auto* frob = app.add_subcommand("frobenius-check", "Frobenius error against its limit");
  auto* cluster = app.add_subcommand("cluster-experiment", "Clustering error rates");
  for (CLI::App* sub : {clt, frob, cluster}) exp.attach(*sub, true);
  clt->callback([&] {
    action = [&] {
      const ExperimentConfig c = exp.resolve();
      const CltReport r = run_clt_check(c);
      finish(to_table(r), r.failures, manifest_for(c), exp.out,
             parse_format(exp.format), start);
    };
  });
  frob->callback([&] {
    action = [&] {
      const ExperimentConfig c = exp.resolve();
      const FrobeniusReport r = run_frobenius_check(c);
      finish(to_table(r), r.failures, manifest_for(c), exp.out,
             parse_format(exp.format), start);
    };
  });
  cluster->callback([&] {
    action = [&] {
      const ExperimentConfig c = exp.resolve();
      const ClusteringReport r = run_clustering_experiment(c);
      finish(to_table(r), r.failures, manifest_for(c), exp.out,
             parse_format(exp.format), start);
    };
  });

  // chernoff
  auto* chern = app.add_subcommand("chernoff", "Chernoff information of two Gaussians");
  std::string mean0, cov0, mean1, cov1;
  chern->add_option("--mean0", mean0)->required();
  chern->add_option("--cov0", cov0, "Rows separated by ';'")->required();
  chern->add_option("--mean1", mean1)->required();
  chern->add_option("--cov1", cov1)->required();
  chern->callback([&] {
    action = [&] {
      GaussianParams g0{parse_vector(mean0, "mean0"), parse_matrix(cov0, "cov0")};
      GaussianParams g1{parse_vector(mean1, "mean1"), parse_matrix(cov1, "cov1")};
      const ChernoffEval e = gaussian_chernoff_information(g0, g1);
      std::cout << "value " << (e.infinite ? std::string("inf") : display(e.value)) << '\n'
                << "t_star " << display(e.t_star) << '\n';
    };
  });

  // ratio-grid
  auto* grid = app.add_subcommand("ratio-grid", "rho_A / rho_L over a (p, r) grid");
  std::string grid_config, grid_model, grid_pi, grid_p, grid_r, grid_out;
  std::string grid_format = "csv";
  std::optional<int> grid_n;
  int grid_threads = 0;
  grid->add_option("--config", grid_config, "INI file with a [grid] section");
  grid->add_option("--model", grid_model, "two-block or three-block");
  grid->add_option("--pi", grid_pi, "Block weights");
  grid->add_option("--p", grid_p, "lo:hi:step or a list");
  grid->add_option("--r", grid_r, "lo:hi:step or a list, r = q - p");
  grid->add_option("--n", grid_n, "Graph size (default 1000)");
  grid->add_option("--threads", grid_threads);
  grid->add_option("--out", grid_out, "Output file (stdout if omitted)");
  grid->add_option("--format", grid_format, "csv or json");
  grid->callback([&] {
    action = [&] {
      GridConfig g = grid_config.empty() ? GridConfig{} : load_grid_config(grid_config);
      if (!grid_model.empty()) {
        if (grid_model == "two-block") {
          g.model = GridModel::TwoBlockPQ;
        } else if (grid_model == "three-block") {
          g.model = GridModel::ThreeBlockPQ;
        } else {
          throw InvalidConfig("model", "expected two-block or three-block");
        }
      }
      if (!grid_pi.empty()) g.weights = parse_vector(grid_pi, "pi");
      if (!grid_p.empty()) g.p_values = parse_range(grid_p, "p");
      if (!grid_r.empty()) g.r_values = parse_range(grid_r, "r");
      if (grid_n) g.n = *grid_n;
      const Eigen::Index k = g.model == GridModel::TwoBlockPQ ? 2 : 3;
      if (g.weights.size() == 0) throw InvalidConfig("pi", "block weights are required");
      if (g.weights.size() != k) {
        throw InvalidConfig("pi", "expected " + std::to_string(k) + " weights");
      }
      if ((g.weights.array() <= 0.0).any() || std::abs(g.weights.sum() - 1.0) > 1e-12) {
        throw InvalidConfig("pi", "weights must be positive and sum to 1");
      }
      if (g.p_values.empty()) throw InvalidConfig("p", "no p values");
      if (g.r_values.empty()) throw InvalidConfig("r", "no r values");
      if (g.n < 2) throw InvalidConfig("n", "must be at least 2");
      const auto cells =
          rho_ratio_grid(g.p_values, g.r_values, g.weights, g.n, g.model, grid_threads);
      RunManifest manifest;
      manifest.version = RDPG_VERSION;
      manifest.config = {{"model", std::string(to_string(g.model))},
                         {"weights", std::vector<double>(g.weights.data(),
                                                         g.weights.data() + k)},
                         {"p", g.p_values},
                         {"r", g.r_values},
                         {"n", g.n}};
      const OutputFormat format = parse_format(grid_format);
      if (grid_out.empty()) {
        if (format == OutputFormat::Csv) {
          write_csv(to_table(cells), std::cout);
        } else {
          manifest.wall_seconds = seconds_since(start);
          std::cout << table_to_json(to_table(cells), manifest).dump(2) << '\n';
        }
      } else {
        finish(to_table(cells), {}, manifest, grid_out, format, start);
      }
    };
  });

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "Fixed two- and three-block comparisons");
  std::string bench_case = "all", bench_out, bench_format = "csv";
  int bench_replicates = 1000, bench_threads = 0;
  std::optional<std::uint64_t> bench_seed;
  bench->add_option("--case", bench_case,
                    "two-block-a, two-block-b, three-block-a, three-block-b or all");
  bench->add_option("--replicates", bench_replicates);
  bench->add_option("--seed", bench_seed)->required();
  bench->add_option("--threads", bench_threads);
  bench->add_option("--out", bench_out)->required();
  bench->add_option("--format", bench_format, "csv or json");
  bench->callback([&] {
    action = [&] {
      std::vector<BenchmarkCase> cases;
      if (bench_case == "all") {
        cases = {BenchmarkCase::TwoBlockA, BenchmarkCase::TwoBlockB,
                 BenchmarkCase::ThreeBlockA, BenchmarkCase::ThreeBlockB};
      } else if (const auto c = benchmark_case_from_string(bench_case)) {
        cases = {*c};
      } else {
        throw InvalidConfig("case", "unknown case '" + bench_case + "'");
      }
      if (bench_replicates < 1) throw InvalidConfig("replicates", "must be at least 1");
      const OutputFormat format = parse_format(bench_format);
      Table table;
      std::vector<ReplicateFailure> failures;
      json configs = json::array();
      for (BenchmarkCase c : cases) {
        const BenchmarkReport r =
            run_benchmark_case(c, bench_replicates, *bench_seed, bench_threads);
        const Table part = to_table(r);
        table.columns = part.columns;
        table.rows.insert(table.rows.end(), part.rows.begin(), part.rows.end());
        failures.insert(failures.end(), r.failures.begin(), r.failures.end());
        json cfg = config_to_json(benchmark_config(c, bench_replicates, *bench_seed));
        cfg["case"] = std::string(to_string(c));
        cfg["threads"] = bench_threads;
        configs.push_back(std::move(cfg));
      }
      RunManifest manifest;
      manifest.version = RDPG_VERSION;
      manifest.base_seed = *bench_seed;
      manifest.config = {{"cases", configs}};
      finish(table, failures, manifest, bench_out, format, start);
    };
  });

  // limits
  auto* limits = app.add_subcommand("limits", "Limit covariances of a block model");
  ExperimentFlags limit_flags;
  int limit_n = 1000;
  limits->add_option("--config,--model", limit_flags.config_path, "INI model file")
      ->required();
  limits->add_option("--n", limit_n, "Graph size for the finite-n block laws");
  limits->callback([&] {
    action = [&] {
      ExperimentConfig c = load_experiment_config(limit_flags.config_path).config;
      c.n_values = {limit_n};
      c.validate();
      const MixtureOfPointMasses f = c.mixture();
      const double rho = c.sparsity;
      const auto ase_blocks = sbm_block_gaussians(f, Method::Ase, c.regime, limit_n, rho);
      const auto lse_blocks = sbm_block_gaussians(f, Method::Lse, c.regime, limit_n, rho);
      const Vector mu = moments(f).mu;
      std::cout << "n " << limit_n << "\nregime " << to_string(c.regime) << "\nsparsity "
                << display(rho) << '\n';
      for (int k = 0; k < f.num_blocks(); ++k) {
        const Vector nu = f.atoms.row(k).transpose();
        std::cout << "\nblock " << k + 1 << "\n  weight " << display(f.weights(k))
                  << "\n  nu " << display(nu)
                  << "\n  Sigma " << display(ase_row_cov(f, nu, c.regime))
                  << "\n  Sigma_tilde " << display(lse_row_cov(f, nu, c.regime))
                  << "\n  nu_tilde " << display(Vector(nu / std::sqrt(nu.dot(mu))))
                  << "\n  ase_mean " << display(ase_blocks[k].mean)
                  << "\n  ase_cov " << display(ase_blocks[k].cov)
                  << "\n  lse_mean " << display(lse_blocks[k].mean)
                  << "\n  lse_cov " << display(lse_blocks[k].cov) << '\n';
      }
      std::cout << "\nase_frobenius_limit " << display(ase_frobenius_limit(f, c.regime))
                << "\nlse_frobenius_limit " << display(lse_frobenius_limit(f, c.regime))
                << '\n';
      if (f.num_blocks() > 1) {
        const auto ra = rho_ase(c.model.block_probs, c.model.weights, limit_n);
        const auto rl = rho_lse(c.model.block_probs, c.model.weights, limit_n);
        std::cout << "rho_a " << (ra ? display(*ra) : "inf") << "\nrho_l "
                  << (rl ? display(*rl) : "inf") << '\n';
      }
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (action) action();
    return 0;
  } catch (const InvalidConfig& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace rdpg
