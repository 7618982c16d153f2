#include "rdpg/chernoff.hpp"

#include <cmath>
#include <limits>

#include "rdpg/errors.hpp"
#include "rdpg/model.hpp"
#include "rdpg/parallel.hpp"

namespace rdpg {
namespace {

constexpr double kRankThreshold = 1e-10;
constexpr double kRangeTolerance = 1e-8;
constexpr double kLowerT = 1e-6;
constexpr double kUpperT = 1.0 - 1e-6;
constexpr double kTTolerance = 1e-8;
constexpr int kSeedPoints = 64;

// Orthonormal basis of the numerical range of a PSD matrix.
Matrix range_basis(const Matrix& cov) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  const Vector& values = eig.eigenvalues();
  const double largest = values.size() > 0 ? values.maxCoeff() : 0.0;
  if (!(largest > 0.0)) return Matrix(cov.rows(), 0);
  int rank = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (values(i) > kRankThreshold * largest) ++rank;
  return eig.eigenvectors().rightCols(rank);
}

double log_det_pd(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() == Eigen::Success) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().array().max(std::numeric_limits<double>::min()).log().sum();
}

// A pair of Gaussians reduced to the common range of their covariances.
class ReducedPair {
 public:
  ReducedPair(const GaussianParams& g0, const GaussianParams& g1) {
    g0.validate();
    g1.validate();
    if (g0.mean.size() != g1.mean.size()) {
      throw DimensionMismatch("Gaussians live in different dimensions");
    }
    const double scale = std::max(g0.cov.norm(), g1.cov.norm());
    equal_covariances_ = (g0.cov - g1.cov).norm() <= 1e-12 * scale;

    const Matrix u0 = range_basis(g0.cov);
    const Matrix u1 = range_basis(g1.cov);
    const Vector delta = g1.mean - g0.mean;
    if (u0.cols() != u1.cols() ||
        (u1 - u0 * (u0.transpose() * u1)).norm() >
            kRangeTolerance * std::sqrt(static_cast<double>(u1.cols()) + 1.0)) {
      infinite_ = true;
      return;
    }
    const Vector inside = u0.transpose() * delta;
    if ((delta - u0 * inside).norm() > kRangeTolerance * delta.norm()) {
      infinite_ = true;
      return;
    }
    delta_ = inside;
    cov0_ = u0.transpose() * g0.cov * u0;
    cov1_ = u0.transpose() * g1.cov * u0;
    log_det0_ = log_det_pd(cov0_);
    log_det1_ = log_det_pd(cov1_);
  }

  bool infinite() const { return infinite_; }
  bool equal_covariances() const { return equal_covariances_; }

  double divergence(double t, bool with_log_det) const {
    if (delta_.size() == 0) return 0.0;
    const Matrix mixed = t * cov0_ + (1.0 - t) * cov1_;
    Eigen::LDLT<Matrix> ldlt(mixed);
    double value = 0.5 * t * (1.0 - t) * delta_.dot(ldlt.solve(delta_));
    if (with_log_det) {
      value += 0.5 * (log_det_pd(mixed) - t * log_det0_ - (1.0 - t) * log_det1_);
    }
    return value;
  }

 private:
  bool infinite_ = false;
  bool equal_covariances_ = false;
  Vector delta_;
  Matrix cov0_, cov1_;
  double log_det0_ = 0.0, log_det1_ = 0.0;
};

void check_t(double t) {
  if (!(t > 0.0 && t < 1.0)) throw InvalidT(t);
}

std::optional<double> divergence_at(const GaussianParams& g0,
                                    const GaussianParams& g1, double t,
                                    bool with_log_det) {
  check_t(t);
  const ReducedPair pair(g0, g1);
  if (pair.infinite()) return std::nullopt;
  return pair.divergence(t, with_log_det);
}

ChernoffEval maximize(const ReducedPair& pair, bool with_log_det) {
  ChernoffEval out;
  if (pair.infinite()) {
    out.infinite = true;
    return out;
  }
  auto objective = [&](double t) {
    ++out.iterations;
    return pair.divergence(t, with_log_det);
  };
  if (pair.equal_covariances()) {
    out.t_star = 0.5;
    out.value = std::max(0.0, objective(0.5));
    return out;
  }

  const double step = (kUpperT - kLowerT) / (kSeedPoints - 1);
  int best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kSeedPoints; ++i) {
    const double value = objective(kLowerT + i * step);
    if (value > best_value) {
      best_value = value;
      best = i;
    }
  }

  double lo = kLowerT + std::max(best - 1, 0) * step;
  double hi = kLowerT + std::min(best + 1, kSeedPoints - 1) * step;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - inv_phi * (hi - lo);
  double b = lo + inv_phi * (hi - lo);
  double fa = objective(a), fb = objective(b);
  while (hi - lo > kTTolerance) {
    if (fa >= fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - inv_phi * (hi - lo);
      fa = objective(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + inv_phi * (hi - lo);
      fb = objective(b);
    }
  }
  double t = fa >= fb ? a : b;
  double value = std::max(fa, fb);
  if (best_value > value) {
    t = kLowerT + best * step;
    value = best_value;
  }

  // Polish: one parabolic step through t and its neighbours.
  const double h = 1e-5;
  if (t - h > 0.0 && t + h < 1.0) {
    const double left = objective(t - h), right = objective(t + h);
    const double curvature = left - 2.0 * value + right;
    if (curvature < 0.0) {
      const double candidate = t - 0.5 * h * (right - left) / curvature;
      if (candidate > t - h && candidate < t + h) {
        const double polished = objective(candidate);
        if (polished > value) {
          t = candidate;
          value = polished;
        }
      }
    }
  }
  out.t_star = t;
  out.value = std::max(0.0, value);
  return out;
}

std::optional<double> min_pairwise(const Matrix& block_probs,
                                   const Vector& weights, int n, Method method,
                                   bool with_log_det) {
  BlockModelParams params;
  params.block_probs = block_probs;
  params.weights = weights;
  params.validate();
  if (block_probs.rows() < 2) return std::nullopt;
  const MixtureOfPointMasses f = mixture_from_block_model(params);
  const std::vector<GaussianParams> blocks =
      sbm_block_gaussians(f, method, RhoRegime::Dense, n);
  std::optional<double> best;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    for (std::size_t l = k + 1; l < blocks.size(); ++l) {
      const ChernoffEval eval =
          maximize(ReducedPair(blocks[k], blocks[l]), with_log_det);
      if (eval.infinite) continue;
      if (!best || eval.value < *best) best = eval.value;
    }
  }
  return best;
}

}  // namespace

std::optional<double> gaussian_chernoff_divergence(const GaussianParams& g0,
                                                   const GaussianParams& g1,
                                                   double t) {
  return divergence_at(g0, g1, t, true);
}

std::optional<double> gaussian_chernoff_divergence_logdet_free(
    const GaussianParams& g0, const GaussianParams& g1, double t) {
  return divergence_at(g0, g1, t, false);
}

ChernoffEval gaussian_chernoff_information(const GaussianParams& g0,
                                           const GaussianParams& g1) {
  return maximize(ReducedPair(g0, g1), true);
}

ChernoffEval gaussian_chernoff_information_logdet_free(const GaussianParams& g0,
                                                       const GaussianParams& g1) {
  return maximize(ReducedPair(g0, g1), false);
}

std::optional<double> rho_ase(const Matrix& block_probs, const Vector& weights,
                              int n) {
  return min_pairwise(block_probs, weights, n, Method::Ase, true);
}

std::optional<double> rho_lse(const Matrix& block_probs, const Vector& weights,
                              int n) {
  return min_pairwise(block_probs, weights, n, Method::Lse, true);
}

std::optional<double> rho_ase_logdet_free(const Matrix& block_probs,
                                          const Vector& weights, int n) {
  return min_pairwise(block_probs, weights, n, Method::Ase, false);
}

std::optional<double> rho_lse_logdet_free(const Matrix& block_probs,
                                          const Vector& weights, int n) {
  return min_pairwise(block_probs, weights, n, Method::Lse, false);
}

double rho_ase_two_block_approx(double p, double q, const Vector& weights,
                                int n) {
  const double pi1 = weights(0), pi2 = weights(1);
  const double second = pi1 * p * p + pi2 * q * q;
  const double spread_p = std::sqrt(pi1 * std::pow(p, 4) * (1 - p * p) +
                                    pi2 * p * std::pow(q, 3) * (1 - p * q));
  const double spread_q = std::sqrt(pi1 * std::pow(p, 3) * q * (1 - p * q) +
                                    pi2 * std::pow(q, 4) * (1 - q * q));
  const double sum = spread_p + spread_q;
  return n * (p - q) * (p - q) * second * second / (2.0 * sum * sum);
}

double rho_lse_two_block_approx(double p, double q, const Vector& weights,
                                int n) {
  const double pi1 = weights(0), pi2 = weights(1);
  const double mean = pi1 * p + pi2 * q;
  const double spread_p = std::sqrt(pi1 * p * (1 - p * p) + pi2 * q * (1 - p * q));
  const double spread_q = std::sqrt(pi1 * p * (1 - p * q) + pi2 * q * (1 - q * q));
  const double root_gap = std::sqrt(p) - std::sqrt(q);
  const double sum = spread_p + spread_q;
  return 2.0 * n * root_gap * root_gap * mean * mean / (sum * sum);
}

Matrix grid_block_probs(GridModel model, double p, double q) {
  if (model == GridModel::TwoBlockPQ) {
    Matrix b(2, 2);
    b << p * p, p * q, p * q, q * q;
    return b;
  }
  Matrix b = Matrix::Constant(3, 3, q);
  b.diagonal().setConstant(p);
  return b;
}

std::vector<RhoGridCell> rho_ratio_grid(const std::vector<double>& p_values,
                                        const std::vector<double>& r_values,
                                        const Vector& weights, int n,
                                        GridModel model, int threads) {
  std::vector<RhoGridCell> cells(p_values.size() * r_values.size());
  parallel_for(cells.size(), threads, [&](std::size_t index) {
    RhoGridCell& cell = cells[index];
    cell.p = p_values[index / r_values.size()];
    cell.r = r_values[index % r_values.size()];
    const double q = cell.p + cell.r;
    const bool in_range = cell.p > 0.0 && cell.p <= 1.0 && q > 0.0 && q <= 1.0;
    if (!in_range) return;
    try {
      const Matrix b = grid_block_probs(model, cell.p, q);
      cell.rho_a = rho_ase(b, weights, n);
      cell.rho_l = rho_lse(b, weights, n);
    } catch (const Error&) {
      cell.rho_a.reset();
      cell.rho_l.reset();
      return;
    }
    if (!cell.rho_a || !cell.rho_l) {
      cell.status = CellStatus::Infinite;
    } else if (*cell.rho_l > 0.0) {
      cell.ratio = *cell.rho_a / *cell.rho_l;
      cell.status = CellStatus::Ok;
    }
  });
  return cells;
}

std::string_view to_string(CellStatus s) {
  switch (s) {
    case CellStatus::Ok:
      return "ok";
    case CellStatus::Infinite:
      return "inf";
    case CellStatus::Invalid:
      break;
  }
  return "invalid";
}

std::string_view to_string(GridModel m) {
  return m == GridModel::TwoBlockPQ ? "two_block_pq" : "three_block_pq";
}

}  // namespace rdpg
