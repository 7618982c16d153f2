#include "rdpg/mc_harness.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include <boost/math/distributions/chi_squared.hpp>

#include "rdpg/chernoff.hpp"
#include "rdpg/clustering.hpp"
#include "rdpg/embedding.hpp"
#include "rdpg/errors.hpp"
#include "rdpg/limit_laws.hpp"
#include "rdpg/parallel.hpp"
#include "rdpg/random.hpp"

namespace rdpg {
namespace {

constexpr int kMaxRetries = 3;
constexpr std::uint64_t kRetryPurpose = 0x7e7000;
constexpr std::uint64_t kClusterPurpose = 0xc105;
constexpr std::uint64_t kOraclePurpose = 0x0a1e;

struct Summary {
  double mean = 0.0;
  double standard_error = 0.0;
  int count = 0;
};

Summary summarize(const std::vector<double>& values) {
  Summary s;
  s.count = static_cast<int>(values.size());
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= s.count;
  if (s.count > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.standard_error = std::sqrt(ss / (s.count - 1) / s.count);
  }
  return s;
}

// Runs body(seed) for every replicate, retrying failed attempts with fresh
// seeds. Slot i of the result holds replicate i, or nothing if it failed.
template <typename Result, typename Body>
std::vector<std::optional<Result>> run_replicates(
    int n, int replicates, std::uint64_t base_seed, int threads,
    std::vector<ReplicateFailure>& failures, Body body) {
  std::vector<std::optional<Result>> results(replicates);
  std::vector<std::optional<ReplicateFailure>> failed(replicates);
  parallel_for(static_cast<std::size_t>(replicates), threads, [&](std::size_t i) {
    const std::uint64_t seed = replicate_seed(base_seed, i);
    std::string message;
    for (int attempt = 0; attempt <= kMaxRetries; ++attempt) {
      const std::uint64_t attempt_seed =
          attempt == 0 ? seed : derive_seed(seed, kRetryPurpose + attempt);
      try {
        results[i] = body(attempt_seed);
        return;
      } catch (const Error& e) {
        message = e.what();
      }
    }
    failed[i] = ReplicateFailure{n, static_cast<int>(i), kMaxRetries + 1, message};
  });
  for (auto& f : failed)
    if (f) failures.push_back(std::move(*f));
  return results;
}

struct Draw {
  Matrix adjacency;
  Matrix latents;
  Labels labels;
};

Draw draw_graph(const ExperimentConfig& config, const MixtureOfPointMasses& f,
                int n, std::uint64_t seed) {
  Draw draw;
  if (config.noiseless) {
    LatentDraw latent = sample_latents(f, n, seed);
    draw.adjacency = probability_matrix(latent.latents, config.sparsity);
    draw.latents = std::move(latent.latents);
    draw.labels = std::move(latent.labels);
  } else {
    RdpgSample sample = sample_rdpg(f, n, config.sparsity, seed);
    draw.adjacency = std::move(sample.adjacency);
    draw.latents = std::move(sample.latents);
    draw.labels = std::move(sample.labels);
  }
  return draw;
}

// The embedding's target (sqrt(rho) X or Xtilde) and the residual scale.
struct Target {
  Matrix rows;
  double scale = 1.0;
};

Target target_for(Method method, const Matrix& latents, double rho) {
  const double n = static_cast<double>(latents.rows());
  if (method == Method::Ase) return {std::sqrt(rho) * latents, std::sqrt(n)};
  return {tilde_latents(latents), n * std::sqrt(rho)};
}

Matrix pseudo_inverse_psd(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  const double cutoff = 1e-10 * std::max(eig.eigenvalues().maxCoeff(), 0.0);
  Vector inv = Vector::Zero(m.rows());
  for (Eigen::Index i = 0; i < inv.size(); ++i)
    if (eig.eigenvalues()(i) > cutoff) inv(i) = 1.0 / eig.eigenvalues()(i);
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

// Fraction of residuals inside {r : r^T S^+ r <= q} with r in range(S).
double ellipsoid_coverage(const std::vector<Vector>& residuals,
                          const Matrix& cov, double quantile) {
  if (residuals.empty()) return 0.0;
  const Matrix pinv = pseudo_inverse_psd(cov);
  const Matrix projector = cov * pinv;
  int inside = 0;
  for (const Vector& r : residuals) {
    const double outside = (r - projector * r).norm();
    if (outside <= 1e-8 * std::max(r.norm(), 1e-300) && r.dot(pinv * r) <= quantile) {
      ++inside;
    }
  }
  return static_cast<double>(inside) / static_cast<double>(residuals.size());
}

Matrix sample_covariance(const std::vector<Vector>& rows) {
  const Eigen::Index d = rows.front().size();
  Vector mean = Vector::Zero(d);
  for (const Vector& r : rows) mean += r;
  mean /= static_cast<double>(rows.size());
  Matrix cov = Matrix::Zero(d, d);
  for (const Vector& r : rows) cov += (r - mean) * (r - mean).transpose();
  return cov / std::max<double>(static_cast<double>(rows.size()) - 1.0, 1.0);
}

int resolved_dim(const ExperimentConfig& config) {
  return config.dim > 0 ? config.dim : numerical_rank(config.model.block_probs);
}

}  // namespace

std::string_view to_string(Clusterer c) {
  switch (c) {
    case Clusterer::KMeans:
      return "kmeans";
    case Clusterer::Gmm:
      return "gmm";
    case Clusterer::LinearOracle:
      return "linear";
    case Clusterer::BayesOracle:
      break;
  }
  return "bayes";
}

void ExperimentConfig::validate() const {
  try {
    model.validate();
  } catch (const Error& e) {
    throw InvalidConfig("model", e.what());
  }
  if (n_values.empty()) throw InvalidConfig("n", "at least one n is required");
  for (int n : n_values)
    if (n < 2) throw InvalidConfig("n", "every n must be at least 2");
  if (replicates < 1) throw InvalidConfig("replicates", "must be at least 1");
  if (!(sparsity > 0.0 && sparsity <= 1.0)) {
    throw InvalidConfig("sparsity", "must lie in (0, 1]");
  }
  if (regime == RhoRegime::Dense && sparsity != 1.0) {
    throw InvalidConfig("sparsity", "the dense regime requires sparsity 1");
  }
  if (dim < 0 || dim > model.block_probs.rows()) {
    throw InvalidConfig("dim", "must lie in 0..K");
  }
  if (methods.empty()) throw InvalidConfig("methods", "at least one method is required");
  if (restarts < 1) throw InvalidConfig("restarts", "must be at least 1");
  if (oracle_samples < 1) throw InvalidConfig("oracle_samples", "must be at least 1");
  try {
    mixture();
  } catch (const Error& e) {
    throw InvalidConfig("model", e.what());
  }
}

MixtureOfPointMasses ExperimentConfig::mixture() const {
  return mixture_from_block_model(model, resolved_dim(*this));
}

CltReport run_clt_check(const ExperimentConfig& config) {
  config.validate();
  const MixtureOfPointMasses f = config.mixture();
  const int d = f.dim();
  const int blocks = f.num_blocks();
  const double quantile =
      boost::math::quantile(boost::math::chi_squared(static_cast<double>(d)), 0.95);

  // Per replicate: [method][block] residual of the block's first vertex.
  using Residuals = std::vector<std::vector<std::optional<Vector>>>;
  CltReport report;
  report.replicates = config.replicates;
  for (int n : config.n_values) {
    const auto results = run_replicates<Residuals>(
        n, config.replicates, config.base_seed, config.threads, report.failures,
        [&](std::uint64_t seed) {
          const Draw draw = draw_graph(config, f, n, seed);
          Residuals out(config.methods.size(),
                        std::vector<std::optional<Vector>>(blocks));
          for (std::size_t m = 0; m < config.methods.size(); ++m) {
            const Target target =
                target_for(config.methods[m], draw.latents, config.sparsity);
            const Embedding emb = embed(draw.adjacency, d, config.methods[m]);
            const Matrix aligned =
                emb.rows * procrustes_align(emb.rows, target.rows).rotation;
            for (int i = 0; i < n; ++i) {
              auto& slot = out[m][draw.labels[i]];
              if (slot) continue;
              slot = Vector(target.scale * (aligned.row(i) - target.rows.row(i)).transpose());
            }
          }
          return out;
        });

    for (std::size_t m = 0; m < config.methods.size(); ++m) {
      for (int k = 0; k < blocks; ++k) {
        std::vector<Vector> rows;
        for (const auto& r : results)
          if (r && (*r)[m][k]) rows.push_back(*(*r)[m][k]);
        CltBlock block;
        block.n = n;
        block.method = config.methods[m];
        block.block = k;
        block.samples = static_cast<int>(rows.size());
        const Vector nu = f.atoms.row(k).transpose();
        block.theoretical = config.methods[m] == Method::Ase
                                ? ase_row_cov(f, nu, config.regime)
                                : lse_row_cov(f, nu, config.regime);
        if (rows.size() >= 2) {
          block.empirical = sample_covariance(rows);
          block.relative_error = (block.empirical - block.theoretical).norm() /
                                 block.theoretical.norm();
          block.coverage = ellipsoid_coverage(rows, block.theoretical, quantile);
        } else {
          block.empirical = Matrix::Zero(d, d);
          block.relative_error = std::numeric_limits<double>::quiet_NaN();
        }
        report.blocks.push_back(std::move(block));
      }
    }
  }
  return report;
}

FrobeniusReport run_frobenius_check(const ExperimentConfig& config) {
  config.validate();
  const MixtureOfPointMasses f = config.mixture();
  const int d = f.dim();
  FrobeniusReport report;
  for (int n : config.n_values) {
    const auto results = run_replicates<std::vector<double>>(
        n, config.replicates, config.base_seed, config.threads, report.failures,
        [&](std::uint64_t seed) {
          const Draw draw = draw_graph(config, f, n, seed);
          std::vector<double> out;
          for (Method method : config.methods) {
            const Target target = target_for(method, draw.latents, config.sparsity);
            const Embedding emb = embed(draw.adjacency, d, method);
            const double residual = procrustes_align(emb.rows, target.rows).residual_frobenius;
            const double scale =
                method == Method::Ase ? 1.0 : static_cast<double>(n) * config.sparsity;
            out.push_back(scale * residual * residual);
          }
          return out;
        });
    for (std::size_t m = 0; m < config.methods.size(); ++m) {
      std::vector<double> values;
      for (const auto& r : results)
        if (r) values.push_back((*r)[m]);
      const Summary s = summarize(values);
      FrobeniusRow row;
      row.n = n;
      row.method = config.methods[m];
      row.replicates = s.count;
      row.empirical = s.mean;
      row.standard_error = s.standard_error;
      row.theoretical = config.methods[m] == Method::Ase
                            ? ase_frobenius_limit(f, config.regime)
                            : lse_frobenius_limit(f, config.regime);
      row.ratio = row.empirical / row.theoretical;
      report.rows.push_back(row);
    }
  }
  return report;
}

ClusteringReport run_clustering_experiment(const ExperimentConfig& config) {
  config.validate();
  const MixtureOfPointMasses f = config.mixture();
  const int d = f.dim();
  const int k = f.num_blocks();
  std::vector<Clusterer> sample_based;
  bool want_linear = false, want_bayes = false;
  for (Clusterer c : config.clusterers) {
    if (c == Clusterer::KMeans || c == Clusterer::Gmm) sample_based.push_back(c);
    if (c == Clusterer::LinearOracle) want_linear = true;
    if (c == Clusterer::BayesOracle) want_bayes = true;
  }

  ClusteringReport report;
  for (int n : config.n_values) {
    // Per replicate: [method][clusterer] error rate.
    using Errors = std::vector<std::vector<double>>;
    std::vector<std::optional<Errors>> results;
    if (!sample_based.empty()) {
      results = run_replicates<Errors>(
          n, config.replicates, config.base_seed, config.threads, report.failures,
          [&](std::uint64_t seed) {
            const Draw draw = draw_graph(config, f, n, seed);
            const std::uint64_t cluster_seed = derive_seed(seed, kClusterPurpose);
            Errors out;
            for (Method method : config.methods) {
              const Embedding emb = embed(draw.adjacency, d, method);
              std::vector<double> errors;
              for (Clusterer c : sample_based) {
                const ClusteringResult fit =
                    c == Clusterer::KMeans
                        ? kmeans(emb.rows, k, cluster_seed, {config.restarts, 300})
                        : gmm_em(emb.rows, k, cluster_seed,
                                 GmmOptions{config.restarts, 500, 1e-8, 1e-8});
                errors.push_back(error_rate(fit.labels, draw.labels, k));
              }
              out.push_back(std::move(errors));
            }
            return out;
          });
    }
    for (std::size_t m = 0; m < config.methods.size(); ++m) {
      for (std::size_t c = 0; c < sample_based.size(); ++c) {
        std::vector<double> values;
        for (const auto& r : results)
          if (r) values.push_back((*r)[m][c]);
        const Summary s = summarize(values);
        report.rows.push_back(ClusteringRow{n, config.methods[m], sample_based[c],
                                            s.mean, s.standard_error, s.count});
      }
      if (!want_linear && !want_bayes) continue;
      const auto gaussians =
          sbm_block_gaussians(f, config.methods[m], config.regime, n, config.sparsity);
      const OracleRates rates = oracle_rates(
          gaussians, f.weights,
          derive_seed(replicate_seed(config.base_seed, static_cast<std::uint64_t>(n)),
                      kOraclePurpose),
          config.oracle_samples);
      if (want_linear) {
        report.rows.push_back(ClusteringRow{n, config.methods[m], Clusterer::LinearOracle,
                                            rates.linear, rates.linear_se,
                                            config.oracle_samples});
      }
      if (want_bayes) {
        report.rows.push_back(ClusteringRow{n, config.methods[m], Clusterer::BayesOracle,
                                            rates.bayes, rates.bayes_se,
                                            config.oracle_samples});
      }
    }
  }
  return report;
}

std::string_view to_string(BenchmarkCase c) {
  switch (c) {
    case BenchmarkCase::TwoBlockA:
      return "two-block-a";
    case BenchmarkCase::TwoBlockB:
      return "two-block-b";
    case BenchmarkCase::ThreeBlockA:
      return "three-block-a";
    case BenchmarkCase::ThreeBlockB:
      break;
  }
  return "three-block-b";
}

std::optional<BenchmarkCase> benchmark_case_from_string(std::string_view name) {
  for (BenchmarkCase c : {BenchmarkCase::TwoBlockA, BenchmarkCase::TwoBlockB,
                          BenchmarkCase::ThreeBlockA, BenchmarkCase::ThreeBlockB}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

namespace {

struct CaseParams {
  GridModel model;
  double p, q;
  int n;
};

CaseParams case_params(BenchmarkCase which) {
  switch (which) {
    case BenchmarkCase::TwoBlockA:
      return {GridModel::TwoBlockPQ, 0.75, 0.6, 200};
    case BenchmarkCase::TwoBlockB:
      return {GridModel::TwoBlockPQ, 0.2, 0.3, 400};
    case BenchmarkCase::ThreeBlockA:
      return {GridModel::ThreeBlockPQ, 0.9, 0.72, 800};
    case BenchmarkCase::ThreeBlockB:
      break;
  }
  return {GridModel::ThreeBlockPQ, 0.34, 0.15, 1600};
}

}  // namespace

ExperimentConfig benchmark_config(BenchmarkCase which, int replicates,
                                  std::uint64_t base_seed) {
  const CaseParams params = case_params(which);
  ExperimentConfig config;
  config.model.block_probs = grid_block_probs(params.model, params.p, params.q);
  if (params.model == GridModel::TwoBlockPQ) {
    config.model.weights = Vector(2);
    config.model.weights << 0.6, 0.4;
  } else {
    config.model.weights = Vector(3);
    config.model.weights << 0.8, 0.1, 0.1;
  }
  config.n_values = {params.n};
  config.replicates = replicates;
  config.base_seed = base_seed;
  config.methods = {Method::Ase, Method::Lse};
  config.clusterers = {Clusterer::Gmm};
  return config;
}

BenchmarkReport run_benchmark_case(BenchmarkCase which, int replicates,
                                   std::uint64_t base_seed, int threads) {
  ExperimentConfig config = benchmark_config(which, replicates, base_seed);
  config.threads = threads;
  const CaseParams params = case_params(which);
  const ClusteringReport errors = run_clustering_experiment(config);

  BenchmarkReport report;
  report.which = which;
  report.n = params.n;
  report.p = params.p;
  report.q = params.q;
  report.failures = errors.failures;
  for (const ClusteringRow& row : errors.rows) {
    if (row.method == Method::Ase) {
      report.ase_error = row.mean_error;
      report.ase_standard_error = row.standard_error;
    } else {
      report.lse_error = row.mean_error;
      report.lse_standard_error = row.standard_error;
    }
    report.replicates = row.replicates;
  }
  report.rho_a = rho_ase(config.model.block_probs, config.model.weights, params.n);
  report.rho_l = rho_lse(config.model.block_probs, config.model.weights, params.n);
  if (report.rho_a && report.rho_l && *report.rho_l > 0.0) {
    report.ratio = *report.rho_a / *report.rho_l;
  }
  return report;
}

}  // namespace rdpg
