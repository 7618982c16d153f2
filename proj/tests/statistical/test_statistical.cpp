// Slow Monte Carlo checks against the limit laws. Labelled "statistical".

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "rdpg/eigensolver.hpp"
#include "rdpg/embedding.hpp"
#include "rdpg/limit_laws.hpp"
#include "rdpg/mc_harness.hpp"
#include "rdpg/model.hpp"

using namespace rdpg;

namespace {

BlockModelParams example_model() {
  BlockModelParams params;
  params.block_probs.resize(2, 2);
  params.block_probs << 0.42, 0.42, 0.42, 0.5;
  params.weights.resize(2);
  params.weights << 0.6, 0.4;
  return params;
}

}  // namespace

TEST_CASE("adjacency rows of an Erdos-Renyi graph center on p") {
  const double p = 0.7;
  const int n = 1000;
  MixtureOfPointMasses f;
  f.atoms = Matrix::Constant(1, 1, p);
  f.weights = Vector::Constant(1, 1.0);
  const RdpgSample s = sample_rdpg(f, n, 1.0, 91);
  const Embedding e = ase(s.adjacency, 1);
  CHECK(std::abs(std::abs(e.rows.mean()) - p) < 5.0 / std::sqrt(n));
}

TEST_CASE("Laplacian row covariance matches the limit") {
  ExperimentConfig c;
  c.model.block_probs.resize(2, 2);
  c.model.block_probs << 0.6, 0.2, 0.2, 0.5;
  c.model.weights = Vector::Constant(2, 0.5);
  c.n_values = {1000};
  c.replicates = 2000;
  c.base_seed = 92;
  c.methods = {Method::Lse};
  const CltReport report = run_clt_check(c);
  CHECK(report.failures.empty());
  for (const CltBlock& b : report.blocks) {
    INFO("block " << b.block << " rel err " << b.relative_error);
    CHECK(b.relative_error < 0.10);
  }
}

TEST_CASE("Erdos-Renyi Frobenius errors approach their limits") {
  ExperimentConfig c;
  c.model.block_probs = Matrix::Constant(1, 1, 0.5);
  c.model.weights = Vector::Constant(1, 1.0);
  c.n_values = {250, 2000};
  c.replicates = 20;
  c.base_seed = 93;
  const FrobeniusReport report = run_frobenius_check(c);
  for (Method m : {Method::Ase, Method::Lse}) {
    double small = 0, large = 0;
    for (const FrobeniusRow& r : report.rows) {
      if (r.method != m) continue;
      (r.n == 250 ? small : large) = std::abs(r.ratio - 1.0);
    }
    INFO(to_string(m) << " deviation at 250: " << small << ", at 2000: " << large);
    CHECK(large < 0.15);
    CHECK(large <= small + 0.05);
  }
}

TEST_CASE("within-block variance of the adjacency eigenvectors") {
  const MixtureOfPointMasses f = mixture_from_block_model(example_model());
  const int n = 1500;
  const int replicates = 50;
  std::vector<double> sums(2, 0.0);
  for (int r = 0; r < replicates; ++r) {
    const RdpgSample s = sample_rdpg(f, n, 1.0, 9400 + r);
    const Embedding e = ase(s.adjacency, 2);
    for (int k = 0; k < 2; ++k) {
      sums[k] += static_cast<double>(n) * n *
                 empirical_within_block(e.eigenvectors, s.labels, k, k);
    }
  }
  for (int k = 0; k < 2; ++k) {
    const double limit = within_block_limit(f, k, Method::Ase, RhoRegime::Dense);
    const double mean = sums[k] / replicates;
    INFO("block " << k << ": " << mean << " vs " << limit);
    CHECK(std::abs(mean / limit - 1.0) < 0.15);
  }
}

TEST_CASE("Laplacian perturbation concentrates") {
  const MixtureOfPointMasses f = mixture_from_block_model(example_model());
  const int n = 2000;
  std::vector<double> scaled;
  for (int r = 0; r < 20; ++r) {
    const RdpgSample s = sample_rdpg(f, n, 1.0, 9500 + r);
    const Matrix p = probability_matrix(s.latents, 1.0);
    const double min_degree = p.rowwise().sum().minCoeff();
    const Matrix diff = normalized_laplacian(s.adjacency) - normalized_laplacian(p);
    scaled.push_back(symmetric_spectral_norm(diff) * std::sqrt(min_degree));
  }
  std::nth_element(scaled.begin(), scaled.begin() + 10, scaled.end());
  INFO("median " << scaled[10]);
  CHECK(scaled[10] <= 10.0);
}
