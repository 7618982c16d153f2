#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rdpg/limit_laws.hpp"
#include "rdpg/types.hpp"

namespace rdpg {

struct MixtureFit {
  std::vector<GaussianParams> components;
  Vector weights;
};

struct ClusteringResult {
  Labels labels;   // 0-based
  Matrix centers;  // K x d
  std::optional<MixtureFit> model;
  /// Log-likelihood for GMM, within-cluster sum of squares for k-means.
  double objective = 0.0;
  /// Objective after every iteration of the winning restart.
  std::vector<double> objective_trace;
  bool converged = false;
  int restarts_used = 0;
};

struct KMeansOptions {
  int restarts = 10;
  int max_iterations = 300;
};

struct GmmOptions {
  int restarts = 10;
  int max_iterations = 500;
  double relative_tolerance = 1e-8;
  double ridge = 1e-8;  // times the pooled trace / d
};

/// Lloyd's algorithm from k-means++ seeds, best of `restarts`.
/// Throws DegeneratePoints if there are fewer than K distinct points.
ClusteringResult kmeans(const Matrix& points, int k, std::uint64_t seed,
                        const KMeansOptions& options = {});

/// Full-covariance EM started from a k-means++ Lloyd partition, best
/// log-likelihood of `restarts`. Requires n >= K (d + 1). Throws
/// CovarianceCollapse when no restart yields positive definite covariances.
ClusteringResult gmm_em(const Matrix& points, int k, std::uint64_t seed,
                        const GmmOptions& options = {});

/// Fraction misclassified under the best matching of labels, searched over
/// all K! permutations. Throws TooManyBlocks for K > 10.
double error_rate(const Labels& predicted, const Labels& truth, int k);

struct OracleRates {
  double bayes = 0.0;
  double bayes_se = 0.0;
  double linear = 0.0;
  double linear_se = 0.0;
};

/// Monte Carlo error rates of the maximum-posterior rule and the
/// nearest-mean rule on draws from the given Gaussian mixture.
OracleRates oracle_rates(const std::vector<GaussianParams>& gaussians,
                         const Vector& weights, std::uint64_t seed, int samples);

}  // namespace rdpg
