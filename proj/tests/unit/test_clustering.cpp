#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "rdpg/clustering.hpp"
#include "rdpg/errors.hpp"
#include "rdpg/limit_laws.hpp"
#include "rdpg/model.hpp"
#include "rdpg/random.hpp"

using namespace rdpg;

namespace {

struct LabeledPoints {
  Matrix points;
  Labels labels;
};

LabeledPoints draw_mixture(const std::vector<GaussianParams>& gs,
                           const std::vector<int>& counts, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal;
  int n = 0;
  for (int c : counts) n += c;
  const Eigen::Index d = gs[0].mean.size();
  LabeledPoints out{Matrix(n, d), Labels(n)};
  int row = 0;
  for (std::size_t g = 0; g < gs.size(); ++g) {
    const Matrix l = gs[g].cov.llt().matrixL();
    for (int i = 0; i < counts[g]; ++i, ++row) {
      Vector z(d);
      for (Eigen::Index j = 0; j < d; ++j) z(j) = normal(rng);
      out.points.row(row) = (gs[g].mean + l * z).transpose();
      out.labels[row] = static_cast<int>(g);
    }
  }
  return out;
}

GaussianParams gaussian(std::initializer_list<double> mean, const Matrix& cov) {
  Vector m(static_cast<Eigen::Index>(mean.size()));
  Eigen::Index i = 0;
  for (double x : mean) m(i++) = x;
  return {m, cov};
}

Matrix two_by_two(double a, double b, double c) {
  Matrix m(2, 2);
  m << a, b, b, c;
  return m;
}

}  // namespace

TEST_CASE("kmeans") {
  SUBCASE("separated clouds") {
    const auto data = draw_mixture({gaussian({0, 0}, 0.01 * Matrix::Identity(2, 2)),
                                    gaussian({5, 5}, 0.01 * Matrix::Identity(2, 2))},
                                   {100, 150}, 1);
    const ClusteringResult r = kmeans(data.points, 2, 7);
    CHECK(error_rate(r.labels, data.labels, 2) == 0.0);
    CHECK(r.converged);
    CHECK(r.restarts_used == 10);
  }
  SUBCASE("one cluster") {
    const auto data = draw_mixture({gaussian({1, 2}, two_by_two(1.0, 0.3, 0.5))},
                                   {200}, 2);
    const ClusteringResult r = kmeans(data.points, 1, 3);
    const Eigen::RowVectorXd mean = data.points.colwise().mean();
    CHECK((r.centers.row(0) - mean).norm() < 1e-12);
    const double scatter = (data.points.rowwise() - mean).squaredNorm();
    CHECK(r.objective == doctest::Approx(scatter).epsilon(1e-12));
  }
  SUBCASE("inertia never increases") {
    const auto data = draw_mixture({gaussian({0, 0}, Matrix::Identity(2, 2)),
                                    gaussian({1.5, 0}, Matrix::Identity(2, 2)),
                                    gaussian({0, 1.5}, Matrix::Identity(2, 2))},
                                   {300, 300, 300}, 3);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const ClusteringResult r = kmeans(data.points, 3, seed, {1, 300});
      for (std::size_t i = 1; i < r.objective_trace.size(); ++i) {
        CHECK(r.objective_trace[i] <= r.objective_trace[i - 1] * (1 + 1e-12));
      }
    }
  }
  SUBCASE("deterministic given the seed") {
    const auto data = draw_mixture({gaussian({0, 0}, Matrix::Identity(2, 2)),
                                    gaussian({1, 1}, Matrix::Identity(2, 2))},
                                   {200, 200}, 4);
    CHECK(kmeans(data.points, 2, 9).labels == kmeans(data.points, 2, 9).labels);
  }
  SUBCASE("too few distinct points") {
    Matrix points = Matrix::Ones(10, 2);
    points(3, 0) = 2.0;
    CHECK_THROWS_AS(kmeans(points, 3, 1), DegeneratePoints);
    CHECK_NOTHROW(kmeans(points, 2, 1));
  }
}

TEST_CASE("gmm_em") {
  SUBCASE("recovers component means") {
    const auto g0 = gaussian({0, 0}, two_by_two(1.0, 0.5, 1.0));
    const auto g1 = gaussian({3, 1}, two_by_two(0.5, -0.2, 2.0));
    const auto data = draw_mixture({g0, g1}, {2000, 3000}, 5);
    const ClusteringResult r = gmm_em(data.points, 2, 11);
    REQUIRE(r.model.has_value());
    CHECK(std::abs(r.model->weights.sum() - 1.0) < 1e-10);
    const int first = (r.centers.row(0).transpose() - g0.mean).norm() <
                              (r.centers.row(1).transpose() - g0.mean).norm()
                          ? 0
                          : 1;
    const std::vector<GaussianParams> truth{first == 0 ? g0 : g1, first == 0 ? g1 : g0};
    const std::vector<int> counts{first == 0 ? 2000 : 3000, first == 0 ? 3000 : 2000};
    for (int c = 0; c < 2; ++c) {
      const Vector se = (truth[c].cov.diagonal() / counts[c]).cwiseSqrt();
      const Vector err = (r.centers.row(c).transpose() - truth[c].mean).cwiseAbs();
      CHECK((err.array() < 3.0 * se.array()).all());
    }
    CHECK(error_rate(r.labels, data.labels, 2) < 0.05);
  }
  SUBCASE("log-likelihood never decreases") {
    const auto data = draw_mixture({gaussian({0, 0}, Matrix::Identity(2, 2)),
                                    gaussian({1, 0.5}, two_by_two(0.3, 0.1, 2.0)),
                                    gaussian({-1, 2}, two_by_two(1.5, -0.4, 0.4))},
                                   {400, 300, 300}, 6);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      GmmOptions options;
      options.restarts = 1;
      const ClusteringResult r = gmm_em(data.points, 3, seed, options);
      for (std::size_t i = 1; i < r.objective_trace.size(); ++i) {
        CHECK(r.objective_trace[i] >=
              r.objective_trace[i - 1] - 1e-10 * std::abs(r.objective_trace[i - 1]));
      }
    }
  }
  SUBCASE("one component gives the sample moments") {
    const auto data = draw_mixture({gaussian({1, -1}, two_by_two(2.0, 0.7, 1.0))},
                                   {500}, 8);
    const ClusteringResult r = gmm_em(data.points, 1, 1);
    const Vector mean = data.points.colwise().mean().transpose();
    const Matrix centered = data.points.rowwise() - mean.transpose();
    const Matrix cov = centered.transpose() * centered / 500.0;
    const double ridge = 1e-8 * cov.trace() / 2.0;
    const GaussianParams& fit = r.model->components[0];
    CHECK((fit.mean - mean).norm() < 1e-10);
    CHECK((fit.cov - cov - ridge * Matrix::Identity(2, 2)).norm() < 1e-10);
    CHECK(r.model->weights(0) == doctest::Approx(1.0));
  }
  SUBCASE("needs enough points") {
    CHECK_THROWS_AS(gmm_em(Matrix::Random(5, 2), 2, 1), DegeneratePoints);
  }
}

TEST_CASE("error_rate") {
  const Labels truth{0, 0, 1, 1, 2, 2, 2};
  CHECK(error_rate(truth, truth, 3) == 0.0);
  Labels permuted = truth;
  for (int& l : permuted) l = (l + 1) % 3;
  CHECK(error_rate(permuted, truth, 3) == 0.0);
  CHECK(error_rate(truth, permuted, 3) == 0.0);
  Labels one_off = truth;
  one_off[0] = 2;
  CHECK(error_rate(one_off, truth, 3) == doctest::Approx(1.0 / 7.0));

  Rng rng = make_rng(12);
  Labels random_truth(10000), guess(10000);
  for (int i = 0; i < 10000; ++i) {
    random_truth[i] = uniform01(rng) < 0.6 ? 0 : 1;
    guess[i] = uniform01(rng) < 0.5 ? 0 : 1;
  }
  CHECK(error_rate(guess, random_truth, 2) <= 0.52);

  CHECK_THROWS_AS(error_rate(truth, truth, 11), TooManyBlocks);
  CHECK_THROWS_AS(error_rate(truth, Labels{0, 1}, 3), DimensionMismatch);
}

TEST_CASE("oracle_rates") {
  Vector weights(2);
  SUBCASE("indistinguishable components") {
    weights << 0.3, 0.7;
    const auto g = gaussian({0, 0}, Matrix::Identity(2, 2));
    const OracleRates r = oracle_rates({g, g}, weights, 1, 20000);
    CHECK(std::abs(r.bayes - 0.3) < 3 * std::sqrt(0.21 / 20000));
    CHECK(std::abs(r.linear - 0.3) < 3 * std::sqrt(0.21 / 20000));
  }
  SUBCASE("spherical equal covariances") {
    weights << 0.5, 0.5;
    const OracleRates r =
        oracle_rates({gaussian({0, 0}, Matrix::Identity(2, 2)),
                      gaussian({1.5, 0.5}, Matrix::Identity(2, 2))},
                     weights, 2, 20000);
    CHECK(std::abs(r.bayes - r.linear) <= 2 * std::max(r.bayes_se, r.linear_se));
  }
  SUBCASE("Laplacian blocks of the example model") {
    BlockModelParams params;
    params.block_probs = two_by_two(0.42, 0.42, 0.5);
    params.weights.resize(2);
    params.weights << 0.6, 0.4;
    const MixtureOfPointMasses f = mixture_from_block_model(params);
    const auto gs = sbm_block_gaussians(f, Method::Lse, RhoRegime::Dense, 2000);
    const OracleRates r = oracle_rates(gs, params.weights, 3, 200000);
    CHECK(r.bayes < r.linear);
  }
}
