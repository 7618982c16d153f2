#include "rdpg/model.hpp"

#include <algorithm>
#include <cmath>

#include "rdpg/errors.hpp"
#include "rdpg/random.hpp"

namespace rdpg {
namespace {

constexpr double kPsdTolerance = 1e-10;
// Inner products produced by a factorization may overshoot [0, 1] by roundoff.
constexpr double kProbabilitySlack = 1e-10;

double checked_probability(double p, std::size_t i, std::size_t j) {
  if (p < -kProbabilitySlack || p > 1.0 + kProbabilitySlack ||
      !std::isfinite(p)) {
    throw ProbabilityOutOfRange(i, j, p);
  }
  return std::clamp(p, 0.0, 1.0);
}

LatentDraw draw_latents(const MixtureOfPointMasses& mixture, int n, Rng& rng) {
  mixture.validate();
  if (n < 1) throw InvalidMixture("sample size must be at least 1");
  const int k = mixture.num_blocks();
  Vector cumulative(k);
  double acc = 0.0;
  for (int b = 0; b < k; ++b) {
    acc += mixture.weights(b);
    cumulative(b) = acc;
  }

  LatentDraw draw;
  draw.latents.resize(n, mixture.dim());
  draw.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    const double u = uniform01(rng) * acc;
    int label = 0;
    while (label < k - 1 && u >= cumulative(label)) ++label;
    draw.labels[i] = label;
    draw.latents.row(i) = mixture.atoms.row(label);
  }
  return draw;
}

Matrix draw_graph(const Matrix& latents, double rho, Rng& rng) {
  const Eigen::Index n = latents.rows();
  Matrix adjacency = Matrix::Zero(n, n);
  const Matrix lt = latents.transpose();
  Vector row_probs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    row_probs.noalias() = rho * (latents * lt.col(i));
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double p = checked_probability(row_probs(j), i, j);
      if (uniform01(rng) < p) {
        adjacency(i, j) = 1.0;
        adjacency(j, i) = 1.0;
      }
    }
  }
  return adjacency;
}

}  // namespace

Matrix MixtureOfPointMasses::second_moment() const {
  return atoms.transpose() * weights.asDiagonal() * atoms;
}

void MixtureOfPointMasses::validate() const {
  if (weights.size() == 0) throw InvalidMixture("mixture has no atoms");
  if (atoms.rows() != weights.size()) {
    throw InvalidMixture("atoms and weights disagree on the number of blocks");
  }
  if ((weights.array() <= 0.0).any()) {
    throw InvalidMixture("mixture weights must be strictly positive");
  }
  if (std::abs(weights.sum() - 1.0) > 1e-12) {
    throw InvalidMixture("mixture weights must sum to 1");
  }
  const Matrix gram = atoms * atoms.transpose();
  if ((gram.array() < -kProbabilitySlack).any() ||
      (gram.array() > 1.0 + kProbabilitySlack).any()) {
    throw InvalidMixture("atom inner products must lie in [0, 1]");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(second_moment(),
                                            Eigen::EigenvaluesOnly);
  const double largest = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (eig.eigenvalues().minCoeff() <= kPsdTolerance * std::max(1.0, largest)) {
    throw InvalidMixture("second-moment matrix is rank deficient");
  }
}

void BlockModelParams::validate() const {
  const auto k = block_probs.rows();
  if (k == 0 || block_probs.cols() != k) {
    throw InvalidMixture("block probability matrix must be square");
  }
  if (weights.size() != k) {
    throw InvalidMixture("weights and block matrix disagree on K");
  }
  if ((weights.array() <= 0.0).any() ||
      std::abs(weights.sum() - 1.0) > 1e-12) {
    throw InvalidMixture("block weights must be positive and sum to 1");
  }
  if ((block_probs - block_probs.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw InvalidMixture("block probability matrix must be symmetric");
  }
  if ((block_probs.array() < 0.0).any() || (block_probs.array() > 1.0).any()) {
    throw InvalidMixture("block probabilities must lie in [0, 1]");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(block_probs,
                                            Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -kPsdTolerance) {
    throw NotPsd(eig.eigenvalues().minCoeff());
  }
}

int numerical_rank(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetric, Eigen::EigenvaluesOnly);
  return static_cast<int>((eig.eigenvalues().array() > kPsdTolerance).count());
}

MixtureOfPointMasses mixture_from_block_model(const BlockModelParams& params,
                                              int rank) {
  params.validate();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(params.block_probs);
  const Vector& values = eig.eigenvalues();  // ascending
  const int k = static_cast<int>(values.size());
  const int numerical =
      static_cast<int>((values.array() > kPsdTolerance).count());
  if (rank != numerical) throw RankMismatch(rank, numerical);

  MixtureOfPointMasses mixture;
  mixture.weights = params.weights;
  mixture.atoms.resize(k, rank);
  for (int c = 0; c < rank; ++c) {
    const int src = k - 1 - c;
    Vector v = eig.eigenvectors().col(src);
    for (int r = 0; r < k; ++r) {
      if (std::abs(v(r)) > 1e-14) {
        if (v(r) < 0) v = -v;
        break;
      }
    }
    mixture.atoms.col(c) = v * std::sqrt(values(src));
  }
  mixture.validate();
  return mixture;
}

MixtureOfPointMasses mixture_from_block_model(const BlockModelParams& params) {
  params.validate();
  return mixture_from_block_model(params, numerical_rank(params.block_probs));
}

Matrix probability_matrix(const Matrix& latents, double rho) {
  Matrix p = rho * latents * latents.transpose();
  const auto n = static_cast<std::size_t>(p.rows());
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j) continue;
      p(i, j) = checked_probability(p(i, j), std::min(i, j), std::max(i, j));
    }
  }
  return p;
}

LatentDraw sample_latents(const MixtureOfPointMasses& mixture, int n,
                          std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return draw_latents(mixture, n, rng);
}

Matrix sample_graph(const Matrix& latents, double rho, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return draw_graph(latents, rho, rng);
}

RdpgSample sample_rdpg(const MixtureOfPointMasses& mixture, int n, double rho,
                       std::uint64_t seed) {
  Rng latent_rng = make_rng(seed, 0);
  Rng graph_rng = make_rng(seed, 1);
  LatentDraw draw = draw_latents(mixture, n, latent_rng);
  RdpgSample sample;
  sample.adjacency = draw_graph(draw.latents, rho, graph_rng);
  sample.latents = std::move(draw.latents);
  sample.labels = std::move(draw.labels);
  sample.sparsity = rho;
  return sample;
}

}  // namespace rdpg
