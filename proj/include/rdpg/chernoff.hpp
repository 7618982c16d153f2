#pragma once

#include <optional>
#include <vector>

#include "rdpg/limit_laws.hpp"
#include "rdpg/types.hpp"

namespace rdpg {

/// Result of maximizing the Chernoff divergence over t. When `infinite` is
/// set, `value` is meaningless and `t_star` is 0.5.
struct ChernoffEval {
  double t_star = 0.5;
  double value = 0.0;
  bool infinite = false;
  int iterations = 0;
};

/// Divergence at a fixed t, or nullopt when it is +infinity.
///
///   t(1-t)/2 dm^T S_t^{-1} dm + 1/2 log(|S_t| / (|S_0|^t |S_1|^{1-t}))
///
/// with S_t = t S_0 + (1-t) S_1. Singular covariances are handled on their
/// common range; the value is infinite if the ranges differ or dm leaves
/// the range. Throws InvalidT, NotPsd, DimensionMismatch.
std::optional<double> gaussian_chernoff_divergence(const GaussianParams& g0,
                                                   const GaussianParams& g1,
                                                   double t);

/// Same without the log-determinant term (the large-n approximation).
std::optional<double> gaussian_chernoff_divergence_logdet_free(
    const GaussianParams& g0, const GaussianParams& g1, double t);

/// sup over t in (0, 1) of the divergence.
ChernoffEval gaussian_chernoff_information(const GaussianParams& g0,
                                           const GaussianParams& g1);

ChernoffEval gaussian_chernoff_information_logdet_free(const GaussianParams& g0,
                                                       const GaussianParams& g1);

/// Minimum over block pairs of the Chernoff information between the
/// finite-n block laws of the adjacency (rho_ase) or Laplacian (rho_lse)
/// embedding, dense regime. nullopt means +infinity (including K = 1).
std::optional<double> rho_ase(const Matrix& block_probs, const Vector& weights,
                              int n);
std::optional<double> rho_lse(const Matrix& block_probs, const Vector& weights,
                              int n);

/// The same minima computed without log-determinant terms.
std::optional<double> rho_ase_logdet_free(const Matrix& block_probs,
                                          const Vector& weights, int n);
std::optional<double> rho_lse_logdet_free(const Matrix& block_probs,
                                          const Vector& weights, int n);

/// Closed-form large-n values for the rank-one model with atoms p and q:
///   n (p-q)^2 (pi1 p^2 + pi2 q^2)^2 / (2 (s_p + s_q)^2)
///   2n (sqrt p - sqrt q)^2 (pi1 p + pi2 q)^2 / (t_p + t_q)^2
/// where s_x, t_x are the square roots of the unnormalized row variances.
double rho_ase_two_block_approx(double p, double q, const Vector& weights, int n);
double rho_lse_two_block_approx(double p, double q, const Vector& weights, int n);

/// TwoBlockPQ: latent positions p and q in R^1, B = [[p^2, pq], [pq, q^2]].
/// ThreeBlockPQ: B = q 11^T + (p - q) I with three blocks.
enum class GridModel { TwoBlockPQ, ThreeBlockPQ };

/// Block probabilities implied by (model, p, q).
Matrix grid_block_probs(GridModel model, double p, double q);

enum class CellStatus { Ok, Infinite, Invalid };

struct RhoGridCell {
  double p = 0.0;
  double r = 0.0;
  std::optional<double> rho_a;
  std::optional<double> rho_l;
  std::optional<double> ratio;
  CellStatus status = CellStatus::Invalid;
};

/// Cells in row-major order (p outer, r inner) with q = p + r. Problems in a
/// cell are recorded in its status rather than thrown.
std::vector<RhoGridCell> rho_ratio_grid(const std::vector<double>& p_values,
                                        const std::vector<double>& r_values,
                                        const Vector& weights, int n,
                                        GridModel model, int threads = 1);

std::string_view to_string(CellStatus s);
std::string_view to_string(GridModel m);

}  // namespace rdpg
