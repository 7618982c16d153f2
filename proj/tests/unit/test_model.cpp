#include <cmath>

#include "doctest.h"
#include "rdpg/errors.hpp"
#include "rdpg/model.hpp"
#include "rdpg/random.hpp"

using namespace rdpg;

namespace {

BlockModelParams two_block(double p, double q, double pi1) {
  BlockModelParams params;
  params.block_probs.resize(2, 2);
  params.block_probs << p * p, p * q, p * q, q * q;
  params.weights.resize(2);
  params.weights << pi1, 1.0 - pi1;
  return params;
}

MixtureOfPointMasses single_atom(double p) {
  MixtureOfPointMasses f;
  f.weights = Vector::Ones(1);
  f.atoms = Matrix::Constant(1, 1, p);
  return f;
}

Matrix random_orthogonal(int d, Rng& rng) {
  Matrix g(d, d);
  std::normal_distribution<double> normal;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ();
}

}  // namespace

TEST_CASE("rank-one two-block model factors into scalar atoms") {
  const MixtureOfPointMasses f =
      mixture_from_block_model(two_block(0.75, 0.6, 0.6), 1);
  REQUIRE(f.dim() == 1);
  CHECK(std::abs(std::abs(f.atoms(0, 0)) - 0.75) < 1e-12);
  CHECK(std::abs(std::abs(f.atoms(1, 0)) - 0.60) < 1e-12);
  CHECK(f.atoms(0, 0) * f.atoms(1, 0) > 0.0);
}

TEST_CASE("identity block matrix gives an orthonormal atom set") {
  BlockModelParams params;
  params.block_probs = Matrix::Identity(2, 2);
  params.weights = Vector::Constant(2, 0.5);
  const MixtureOfPointMasses f = mixture_from_block_model(params, 2);
  CHECK((f.atoms * f.atoms.transpose() - Matrix::Identity(2, 2))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
}

TEST_CASE("random rank-two 3x3 block matrix round-trips") {
  Rng rng = make_rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix v(3, 2);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 2; ++j) v(i, j) = 0.1 + 0.5 * uniform01(rng);
    BlockModelParams params;
    params.block_probs = v * v.transpose();
    params.weights = Vector::Constant(3, 1.0 / 3.0);
    if (params.block_probs.maxCoeff() > 1.0) continue;
    const MixtureOfPointMasses f = mixture_from_block_model(params);
    REQUIRE(f.dim() == 2);
    CHECK((f.atoms * f.atoms.transpose() - params.block_probs)
              .cwiseAbs()
              .maxCoeff() < 1e-10);
  }
}

TEST_CASE("block model validation") {
  SUBCASE("rank mismatch") {
    CHECK_THROWS_AS(mixture_from_block_model(two_block(0.75, 0.6, 0.6), 2),
                    RankMismatch);
  }
  SUBCASE("indefinite matrix") {
    BlockModelParams params;
    params.block_probs.resize(2, 2);
    params.block_probs << 0.1, 0.5, 0.5, 0.1;
    params.weights = Vector::Constant(2, 0.5);
    CHECK_THROWS_AS(params.validate(), NotPsd);
  }
  SUBCASE("asymmetric matrix") {
    BlockModelParams params;
    params.block_probs.resize(2, 2);
    params.block_probs << 0.5, 0.2, 0.3, 0.5;
    params.weights = Vector::Constant(2, 0.5);
    CHECK_THROWS_AS(params.validate(), InvalidMixture);
  }
  SUBCASE("weights not summing to one") {
    BlockModelParams params = two_block(0.5, 0.4, 0.5);
    params.weights << 0.5, 0.6;
    CHECK_THROWS_AS(params.validate(), InvalidMixture);
  }
}

TEST_CASE("sample_latents") {
  SUBCASE("single atom") {
    const LatentDraw draw = sample_latents(single_atom(0.3), 50, 1);
    for (int i = 0; i < 50; ++i) {
      CHECK(draw.labels[i] == 0);
      CHECK(draw.latents(i, 0) == 0.3);
    }
  }
  SUBCASE("label frequencies follow the weights") {
    const MixtureOfPointMasses f =
        mixture_from_block_model(two_block(0.75, 0.6, 0.6), 1);
    const LatentDraw draw = sample_latents(f, 100000, 99);
    const auto ones = std::count(draw.labels.begin(), draw.labels.end(), 0);
    CHECK(std::abs(static_cast<double>(ones) / 100000.0 - 0.6) < 0.01);
    for (int i = 0; i < 1000; ++i) {
      CHECK(draw.latents(i, 0) == f.atoms(draw.labels[i], 0));
    }
  }
  SUBCASE("deterministic in the seed") {
    const MixtureOfPointMasses f =
        mixture_from_block_model(two_block(0.75, 0.6, 0.6), 1);
    const LatentDraw a = sample_latents(f, 500, 5);
    const LatentDraw b = sample_latents(f, 500, 5);
    CHECK(a.labels == b.labels);
    CHECK(a.latents == b.latents);
  }
}

TEST_CASE("sample_graph") {
  SUBCASE("probability one gives the complete graph") {
    const Matrix a = sample_graph(Matrix::Ones(20, 1), 1.0, 3);
    CHECK(a == Matrix::Ones(20, 20) - Matrix::Identity(20, 20));
  }
  SUBCASE("probability zero gives the empty graph") {
    CHECK(sample_graph(Matrix::Zero(20, 1), 1.0, 3) == Matrix::Zero(20, 20));
  }
  SUBCASE("mean degree of an Erdos-Renyi graph") {
    const int n = 2000;
    const double p = 0.5;
    const Matrix a = sample_graph(Matrix::Constant(n, 1, p), 1.0, 11);
    const double mean_degree = a.sum() / n;
    const double expected = (n - 1) * p * p;
    CHECK(std::abs(mean_degree - expected) <
          3.0 * std::sqrt(expected * (1.0 - p * p)));
  }
  SUBCASE("symmetric and hollow for many seeds") {
    const Matrix x = Matrix::Constant(60, 2, 0.5);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Matrix a = sample_graph(x, 0.8, seed);
      CHECK(a == a.transpose());
      CHECK(a.diagonal().isZero());
      CHECK(((a.array() == 0.0) || (a.array() == 1.0)).all());
    }
  }
  SUBCASE("out-of-range probability names the pair") {
    Matrix x = Matrix::Constant(5, 1, 0.5);
    x(3, 0) = 2.5;
    try {
      sample_graph(x, 1.0, 0);
      FAIL("expected ProbabilityOutOfRange");
    } catch (const ProbabilityOutOfRange& e) {
      CHECK(e.i() == 0);
      CHECK(e.j() == 3);
    }
  }
}

TEST_CASE("probability_matrix") {
  SUBCASE("constant latent") {
    const Matrix p = probability_matrix(Matrix::Constant(6, 1, 0.4), 0.5);
    CHECK((p.array() - 0.5 * 0.16).abs().maxCoeff() < 1e-15);
  }
  SUBCASE("two-block P takes three values") {
    Matrix x(4, 1);
    x << 0.75, 0.75, 0.6, 0.6;
    const Matrix p = probability_matrix(x, 1.0);
    CHECK(std::abs(p(0, 1) - 0.5625) < 1e-15);
    CHECK(std::abs(p(0, 2) - 0.45) < 1e-15);
    CHECK(std::abs(p(2, 3) - 0.36) < 1e-15);
  }
  SUBCASE("row sums are the expected degrees") {
    Rng rng = make_rng(2);
    Matrix x(30, 2);
    for (int i = 0; i < 30; ++i)
      for (int j = 0; j < 2; ++j) x(i, j) = 0.6 * uniform01(rng);
    const Matrix p = probability_matrix(x, 0.7);
    for (int i = 0; i < 30; ++i) {
      double degree = 0.0;
      for (int j = 0; j < 30; ++j) degree += 0.7 * x.row(i).dot(x.row(j));
      CHECK(std::abs(p.row(i).sum() - degree) < 1e-12);
    }
  }
  SUBCASE("consistent permutation of latents permutes P") {
    Rng rng = make_rng(8);
    Matrix x(12, 2);
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 2; ++j) x(i, j) = 0.7 * uniform01(rng);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(12);
    perm.setIdentity();
    std::shuffle(perm.indices().data(), perm.indices().data() + 12, rng);
    const Matrix lhs = probability_matrix(perm * x, 1.0);
    const Matrix rhs = perm * probability_matrix(x, 1.0) * perm.transpose();
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("factorization is unique up to an orthogonal transform") {
  Rng rng = make_rng(23);
  Matrix v(3, 2);
  v << 0.6, 0.1, 0.3, 0.5, 0.2, 0.2;
  const Matrix w = v * random_orthogonal(2, rng);
  BlockModelParams params;
  params.block_probs = w * w.transpose();
  params.weights = Vector::Constant(3, 1.0 / 3.0);
  const MixtureOfPointMasses f = mixture_from_block_model(params);
  CHECK((f.atoms * f.atoms.transpose() - v * v.transpose())
            .cwiseAbs()
            .maxCoeff() < 1e-10);
}
