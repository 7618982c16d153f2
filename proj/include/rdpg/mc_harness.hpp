#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rdpg/model.hpp"
#include "rdpg/types.hpp"

namespace rdpg {

enum class Clusterer { KMeans, Gmm, LinearOracle, BayesOracle };

std::string_view to_string(Clusterer c);

struct ExperimentConfig {
  BlockModelParams model;
  int dim = 0;  // 0: numerical rank of the block matrix
  std::vector<int> n_values;
  int replicates = 100;
  std::uint64_t base_seed = 0;
  RhoRegime regime = RhoRegime::Dense;
  double sparsity = 1.0;
  std::vector<Method> methods{Method::Ase, Method::Lse};
  std::vector<Clusterer> clusterers{Clusterer::KMeans, Clusterer::Gmm,
                                    Clusterer::LinearOracle,
                                    Clusterer::BayesOracle};
  int restarts = 10;
  int oracle_samples = 100000;
  int threads = 0;  // 0: all cores
  /// Embed P itself instead of a sampled graph.
  bool noiseless = false;

  /// Throws InvalidConfig naming the offending field.
  void validate() const;
  MixtureOfPointMasses mixture() const;
};

/// A replicate that still failed after its retries.
struct ReplicateFailure {
  int n = 0;
  int replicate = 0;
  int attempts = 0;
  std::string message;
};

struct CltBlock {
  int n = 0;
  Method method = Method::Ase;
  int block = 0;
  int samples = 0;
  Matrix empirical;
  Matrix theoretical;
  double relative_error = 0.0;  // Frobenius, relative to theoretical
  double coverage = 0.0;        // inside the theoretical 95% ellipsoid
};

struct CltReport {
  std::vector<CltBlock> blocks;
  int replicates = 0;
  std::vector<ReplicateFailure> failures;
};

/// For every n and method, collects from each replicate the residual of the
/// first vertex of every block, scaled by sqrt(n) (ASE) or n sqrt(rho)
/// (LSE), and compares its covariance with the limit law.
CltReport run_clt_check(const ExperimentConfig& config);

struct FrobeniusRow {
  int n = 0;
  Method method = Method::Ase;
  int replicates = 0;
  double empirical = 0.0;
  double standard_error = 0.0;
  double theoretical = 0.0;
  double ratio = 0.0;
};

struct FrobeniusReport {
  std::vector<FrobeniusRow> rows;
  std::vector<ReplicateFailure> failures;
};

/// Mean of ||Xhat W - rho^{1/2} X||_F^2 (ASE) and n rho ||Xbreve W - Xtilde||_F^2
/// (LSE) per n, against the almost-sure limits.
FrobeniusReport run_frobenius_check(const ExperimentConfig& config);

struct ClusteringRow {
  int n = 0;
  Method method = Method::Ase;
  Clusterer clusterer = Clusterer::KMeans;
  double mean_error = 0.0;
  double standard_error = 0.0;
  /// Graph replicates, or Monte Carlo draws for the oracle rows.
  int replicates = 0;
};

struct ClusteringReport {
  std::vector<ClusteringRow> rows;
  std::vector<ReplicateFailure> failures;
};

/// Error rates of the sample-based clusterers over replicates, plus the
/// oracle rules evaluated on the limiting block Gaussians.
ClusteringReport run_clustering_experiment(const ExperimentConfig& config);

enum class BenchmarkCase { TwoBlockA, TwoBlockB, ThreeBlockA, ThreeBlockB };

std::string_view to_string(BenchmarkCase c);
std::optional<BenchmarkCase> benchmark_case_from_string(std::string_view name);

struct BenchmarkReport {
  BenchmarkCase which = BenchmarkCase::TwoBlockA;
  int n = 0;
  double p = 0.0;
  double q = 0.0;
  int replicates = 0;
  double ase_error = 0.0;
  double ase_standard_error = 0.0;
  double lse_error = 0.0;
  double lse_standard_error = 0.0;
  std::optional<double> rho_a;
  std::optional<double> rho_l;
  std::optional<double> ratio;
  std::vector<ReplicateFailure> failures;
};

/// Built-in configuration (block matrix, weights, n) of one case.
ExperimentConfig benchmark_config(BenchmarkCase which, int replicates = 1000,
                                  std::uint64_t base_seed = 43);

/// GMM error rates of both embeddings on the case's graphs, with rho_A/rho_L.
BenchmarkReport run_benchmark_case(BenchmarkCase which,
                                          int replicates = 1000,
                                          std::uint64_t base_seed = 43,
                                          int threads = 0);

}  // namespace rdpg
