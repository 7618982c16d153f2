#pragma once

#include <cstdint>

#include "rdpg/types.hpp"

namespace rdpg {

/// Finite latent-position law F = sum_k pi_k delta_{nu_k}.
///
/// Invariants (checked by validate()): weights strictly positive and summing
/// to one within 1e-12; every pairwise atom inner product lies in [0, 1];
/// the second-moment matrix sum_k pi_k nu_k nu_k^T has full rank.
struct MixtureOfPointMasses {
  Vector weights;  // K
  Matrix atoms;    // K x d, row k is nu_k

  int num_blocks() const { return static_cast<int>(weights.size()); }
  int dim() const { return static_cast<int>(atoms.cols()); }

  Matrix second_moment() const;
  void validate() const;
};

/// Stochastic blockmodel parametrization: K x K block probabilities and
/// block-membership weights.
struct BlockModelParams {
  Matrix block_probs;
  Vector weights;

  void validate() const;
};

/// Latent matrix, sparsity factor, adjacency and (optional) block labels.
struct RdpgSample {
  Matrix latents;
  double sparsity = 1.0;
  Matrix adjacency;
  Labels labels;
};

struct LatentDraw {
  Matrix latents;
  Labels labels;
};

/// Number of eigenvalues of the symmetric matrix above 1e-10.
int numerical_rank(const Matrix& symmetric);

/// Factors B = V V^T through B = Q L Q^T, V = Q_d L_d^{1/2}, eigenvalues
/// descending. Each eigenvector's first nonzero entry is made positive; the
/// atoms are otherwise only defined up to an orthogonal transform.
MixtureOfPointMasses mixture_from_block_model(const BlockModelParams& params,
                                              int rank);
/// Same, with the rank taken to be the numerical rank of B.
MixtureOfPointMasses mixture_from_block_model(const BlockModelParams& params);

LatentDraw sample_latents(const MixtureOfPointMasses& mixture, int n,
                          std::uint64_t seed);

/// P = rho X X^T. Throws ProbabilityOutOfRange on the first off-diagonal
/// entry outside [0, 1].
Matrix probability_matrix(const Matrix& latents, double rho);

/// Symmetric hollow 0/1 matrix with A_ij ~ Bernoulli(rho X_i^T X_j) for i < j.
Matrix sample_graph(const Matrix& latents, double rho, std::uint64_t seed);

/// Draws latents (stream 0 of `seed`) and then the graph (stream 1).
RdpgSample sample_rdpg(const MixtureOfPointMasses& mixture, int n, double rho,
                       std::uint64_t seed);

}  // namespace rdpg
