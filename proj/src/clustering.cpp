#include "rdpg/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rdpg/errors.hpp"
#include "rdpg/random.hpp"

namespace rdpg {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

int count_distinct_rows(const Matrix& points, int stop_at) {
  std::vector<Eigen::Index> order(points.rows());
  std::iota(order.begin(), order.end(), 0);
  auto row_less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      if (points(a, j) != points(b, j)) return points(a, j) < points(b, j);
    }
    return false;
  };
  std::sort(order.begin(), order.end(), row_less);
  int distinct = order.empty() ? 0 : 1;
  for (std::size_t i = 1; i < order.size() && distinct < stop_at; ++i) {
    if (row_less(order[i - 1], order[i])) ++distinct;
  }
  return distinct;
}

Vector squared_distances(const Matrix& points, const Vector& center) {
  return (points.rowwise() - center.transpose()).rowwise().squaredNorm();
}

std::size_t draw_weighted(const Vector& weights, Rng& rng) {
  const double total = weights.sum();
  double target = uniform01(rng) * total;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    target -= weights(i);
    if (target < 0.0) return static_cast<std::size_t>(i);
  }
  // Roundoff: return the last point with positive weight.
  for (Eigen::Index i = weights.size() - 1; i >= 0; --i) {
    if (weights(i) > 0.0) return static_cast<std::size_t>(i);
  }
  return 0;
}

Matrix kmeans_plus_plus(const Matrix& points, int k, Rng& rng) {
  const Eigen::Index n = points.rows();
  Matrix centers(k, points.cols());
  centers.row(0) = points.row(static_cast<Eigen::Index>(uniform01(rng) * n));
  Vector nearest = squared_distances(points, centers.row(0).transpose());
  for (int c = 1; c < k; ++c) {
    centers.row(c) = points.row(static_cast<Eigen::Index>(draw_weighted(nearest, rng)));
    nearest = nearest.cwiseMin(squared_distances(points, centers.row(c).transpose()));
  }
  return centers;
}

struct LloydRun {
  Labels labels;
  Matrix centers;
  double inertia = 0.0;
  std::vector<double> trace;
  bool converged = false;
};

LloydRun lloyd(const Matrix& points, Matrix centers, int max_iterations) {
  const Eigen::Index n = points.rows();
  const int k = static_cast<int>(centers.rows());
  LloydRun run;
  run.labels.assign(n, -1);
  for (int iter = 0; iter < max_iterations; ++iter) {
    Matrix dist(n, k);
    for (int c = 0; c < k; ++c) dist.col(c) = squared_distances(points, centers.row(c).transpose());
    bool changed = false;
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best;
      inertia += dist.row(i).minCoeff(&best);
      if (run.labels[i] != best) {
        run.labels[i] = static_cast<int>(best);
        changed = true;
      }
    }
    run.inertia = inertia;
    run.trace.push_back(inertia);
    if (!changed) {
      run.converged = true;
      break;
    }
    Matrix sums = Matrix::Zero(k, points.cols());
    std::vector<int> counts(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(run.labels[i]) += points.row(i);
      ++counts[run.labels[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centers.row(c) = sums.row(c) / counts[c];
        continue;
      }
      // Empty cluster: move it to the point farthest from its center.
      Eigen::Index far = 0;
      double far_dist = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (dist(i, run.labels[i]) > far_dist) {
          far_dist = dist(i, run.labels[i]);
          far = i;
        }
      }
      centers.row(c) = points.row(far);
      dist(far, run.labels[far]) = 0.0;
    }
  }
  run.centers = std::move(centers);
  return run;
}

void check_points(const Matrix& points, int k) {
  if (k < 1) throw DegeneratePoints("K must be at least 1");
  if (points.rows() < k || count_distinct_rows(points, k) < k) {
    throw DegeneratePoints("fewer than K distinct points");
  }
}

struct EmRun {
  bool ok = false;
  int failed_component = 0;
  MixtureFit fit;
  Matrix responsibilities;
  double loglik = -std::numeric_limits<double>::infinity();
  std::vector<double> trace;
  bool converged = false;
};

// Returns false (with the offending component) if a covariance is not PD.
bool m_step(const Matrix& points, const Matrix& resp, double ridge,
            MixtureFit& fit, std::vector<Eigen::LLT<Matrix>>& factors,
            int& failed) {
  const Eigen::Index n = points.rows();
  const int k = static_cast<int>(resp.cols());
  const Vector mass = resp.colwise().sum().transpose();
  fit.weights = mass / static_cast<double>(n);
  fit.components.resize(k);
  factors.resize(k);
  for (int c = 0; c < k; ++c) {
    if (!(mass(c) > 1e-12)) {
      failed = c;
      return false;
    }
    GaussianParams& g = fit.components[c];
    g.mean = (points.transpose() * resp.col(c)) / mass(c);
    const Matrix centered = points.rowwise() - g.mean.transpose();
    g.cov = (centered.transpose() * resp.col(c).asDiagonal() * centered) / mass(c);
    g.cov = 0.5 * (g.cov + g.cov.transpose());
    g.cov.diagonal().array() += ridge;
    factors[c].compute(g.cov);
    if (factors[c].info() != Eigen::Success ||
        factors[c].matrixLLT().diagonal().minCoeff() <= 0.0) {
      failed = c;
      return false;
    }
  }
  return true;
}

// Fills resp with posterior probabilities and returns the log-likelihood.
double e_step(const Matrix& points, const MixtureFit& fit,
              const std::vector<Eigen::LLT<Matrix>>& factors, Matrix& resp) {
  const Eigen::Index n = points.rows(), d = points.cols();
  const int k = static_cast<int>(fit.components.size());
  Matrix log_dens(n, k);
  for (int c = 0; c < k; ++c) {
    const Matrix centered =
        (points.rowwise() - fit.components[c].mean.transpose()).transpose();
    const Matrix whitened = factors[c].matrixL().solve(centered);
    const double log_det =
        2.0 * factors[c].matrixLLT().diagonal().array().log().sum();
    log_dens.col(c) =
        (-0.5 * (whitened.colwise().squaredNorm().array() + d * kLog2Pi + log_det) +
         std::log(fit.weights(c)))
            .transpose();
  }
  double loglik = 0.0;
  resp.resize(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double top = log_dens.row(i).maxCoeff();
    const Eigen::RowVectorXd shifted = (log_dens.row(i).array() - top).exp();
    const double total = shifted.sum();
    resp.row(i) = shifted / total;
    loglik += top + std::log(total);
  }
  return loglik;
}

EmRun em(const Matrix& points, const Labels& start, int k, double ridge,
         const GmmOptions& options) {
  const Eigen::Index n = points.rows();
  EmRun run;
  Matrix resp = Matrix::Zero(n, k);
  for (Eigen::Index i = 0; i < n; ++i) resp(i, start[i]) = 1.0;
  std::vector<Eigen::LLT<Matrix>> factors;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    if (!m_step(points, resp, ridge, run.fit, factors, run.failed_component)) {
      return run;
    }
    const double loglik = e_step(points, run.fit, factors, resp);
    run.trace.push_back(loglik);
    const double gain = loglik - run.loglik;
    run.loglik = loglik;
    if (iter > 0 && gain < options.relative_tolerance * std::abs(loglik)) {
      run.converged = true;
      break;
    }
  }
  run.ok = true;
  run.responsibilities = std::move(resp);
  return run;
}

Labels argmax_rows(const Matrix& m) {
  Labels labels(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Eigen::Index best;
    m.row(i).maxCoeff(&best);
    labels[i] = static_cast<int>(best);
  }
  return labels;
}

}  // namespace

ClusteringResult kmeans(const Matrix& points, int k, std::uint64_t seed,
                        const KMeansOptions& options) {
  check_points(points, k);
  ClusteringResult best;
  best.objective = std::numeric_limits<double>::infinity();
  const int restarts = std::max(options.restarts, 1);
  for (int r = 0; r < restarts; ++r) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(r));
    LloydRun run = lloyd(points, kmeans_plus_plus(points, k, rng),
                         options.max_iterations);
    if (run.inertia < best.objective) {
      best.labels = std::move(run.labels);
      best.centers = std::move(run.centers);
      best.objective = run.inertia;
      best.objective_trace = std::move(run.trace);
      best.converged = run.converged;
    }
  }
  best.restarts_used = restarts;
  return best;
}

ClusteringResult gmm_em(const Matrix& points, int k, std::uint64_t seed,
                        const GmmOptions& options) {
  const Eigen::Index d = points.cols();
  if (points.rows() < k * (d + 1)) {
    throw DegeneratePoints("need at least K (d + 1) points for a full-covariance mixture");
  }
  check_points(points, k);
  const Matrix centered = points.rowwise() - points.colwise().mean();
  const double pooled_trace =
      centered.squaredNorm() / static_cast<double>(points.rows());
  const double ridge = options.ridge * pooled_trace / static_cast<double>(d);

  std::optional<EmRun> best;
  int last_failure = 0;
  const int restarts = std::max(options.restarts, 1);
  for (int r = 0; r < restarts; ++r) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(r));
    const LloydRun start =
        lloyd(points, kmeans_plus_plus(points, k, rng), KMeansOptions{}.max_iterations);
    EmRun run = em(points, start.labels, k, ridge, options);
    if (!run.ok) {
      last_failure = run.failed_component;
      continue;
    }
    if (!best || run.loglik > best->loglik) best = std::move(run);
  }
  if (!best) throw CovarianceCollapse(last_failure);

  ClusteringResult out;
  out.labels = argmax_rows(best->responsibilities);
  out.centers.resize(k, d);
  for (int c = 0; c < k; ++c) out.centers.row(c) = best->fit.components[c].mean.transpose();
  out.objective = best->loglik;
  out.objective_trace = std::move(best->trace);
  out.converged = best->converged;
  out.model = std::move(best->fit);
  out.restarts_used = restarts;
  return out;
}

double error_rate(const Labels& predicted, const Labels& truth, int k) {
  if (k > 10) throw TooManyBlocks(k);
  if (predicted.size() != truth.size()) {
    throw DimensionMismatch("label vectors differ in length");
  }
  if (truth.empty()) return 0.0;
  std::vector<long> confusion(static_cast<std::size_t>(k) * k, 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i] < 0 || predicted[i] >= k || truth[i] < 0 || truth[i] >= k) {
      throw DimensionMismatch("label outside 0..K-1");
    }
    ++confusion[static_cast<std::size_t>(predicted[i]) * k + truth[i]];
  }
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  long best = 0;
  do {
    long matched = 0;
    for (int c = 0; c < k; ++c) matched += confusion[static_cast<std::size_t>(c) * k + perm[c]];
    best = std::max(best, matched);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return 1.0 - static_cast<double>(best) / static_cast<double>(truth.size());
}

OracleRates oracle_rates(const std::vector<GaussianParams>& gaussians,
                         const Vector& weights, std::uint64_t seed, int samples) {
  const int k = static_cast<int>(gaussians.size());
  if (k == 0 || weights.size() != k) {
    throw DimensionMismatch("one weight per Gaussian is required");
  }
  if (samples < 1) throw DimensionMismatch("samples must be positive");
  std::vector<Eigen::LLT<Matrix>> factors(k);
  std::vector<double> log_norm(k);
  for (int c = 0; c < k; ++c) {
    gaussians[c].validate();
    factors[c].compute(gaussians[c].cov);
    if (factors[c].info() != Eigen::Success) throw NotPsd(0.0);
    log_norm[c] = std::log(weights(c)) -
                  factors[c].matrixLLT().diagonal().array().log().sum();
  }
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal;
  const Eigen::Index d = gaussians[0].mean.size();
  long bayes_errors = 0, linear_errors = 0;
  Vector z(d);
  for (int s = 0; s < samples; ++s) {
    const int truth = static_cast<int>(draw_weighted(weights, rng));
    for (Eigen::Index j = 0; j < d; ++j) z(j) = normal(rng);
    const Vector x = gaussians[truth].mean + factors[truth].matrixL() * z;
    int bayes = 0, linear = 0;
    double best_post = -std::numeric_limits<double>::infinity();
    double best_dist = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      const Vector diff = x - gaussians[c].mean;
      const double post =
          log_norm[c] - 0.5 * factors[c].matrixL().solve(diff).squaredNorm();
      if (post > best_post) {
        best_post = post;
        bayes = c;
      }
      // Coincident means: prefer the heavier component.
      const double dist = diff.squaredNorm();
      if (dist < best_dist || (dist == best_dist && weights(c) > weights(linear))) {
        best_dist = dist;
        linear = c;
      }
    }
    bayes_errors += bayes != truth;
    linear_errors += linear != truth;
  }
  auto rate = [&](long errors) { return static_cast<double>(errors) / samples; };
  auto se = [&](double r) { return std::sqrt(r * (1.0 - r) / samples); };
  OracleRates out;
  out.bayes = rate(bayes_errors);
  out.bayes_se = se(out.bayes);
  out.linear = rate(linear_errors);
  out.linear_se = se(out.linear);
  return out;
}

}  // namespace rdpg
