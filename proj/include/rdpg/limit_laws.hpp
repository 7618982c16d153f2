#pragma once

#include <vector>

#include "rdpg/model.hpp"
#include "rdpg/types.hpp"

namespace rdpg {

/// First and second moments of a point-mass mixture, plus their
/// degree-weighted versions used by the Laplacian limit laws.
struct MixtureMoments {
  Vector mu;           // E[X]
  Matrix delta;        // E[X X^T]
  Vector mu_tilde;     // E[X / (X^T mu)]
  Matrix delta_tilde;  // E[X X^T / (X^T mu)]
};

/// A multivariate normal law. Invariants: cov symmetric within 1e-12 and
/// eigenvalues >= -1e-10 (checked by validate()).
struct GaussianParams {
  Vector mean;
  Matrix cov;

  void validate() const;
};

/// Throws NonpositiveMeanInnerProduct if some atom has nu_k^T mu <= 0.
MixtureMoments moments(const MixtureOfPointMasses& f);

/// Limit covariance of sqrt(n) (W Xhat_i - X_i) given X_i = x.
/// Dense:     Delta^{-1} E[X X^T (x^T X - (x^T X)^2)] Delta^{-1}.
/// Vanishing: the same without the quadratic term.
Matrix ase_row_cov(const MixtureOfPointMasses& f, const Vector& x,
                   RhoRegime regime);

/// Limit covariance of n (W Xbreve_i - Xtilde_i) given X_i = x:
/// E[(Dt^{-1} X/(X^T mu) - x/(2 x^T mu))(...)^T w(x, X)] with
/// w = (x^T X - (x^T X)^2) / x^T mu (Dense) or x^T X / x^T mu (Vanishing).
Matrix lse_row_cov(const MixtureOfPointMasses& f, const Vector& x,
                   RhoRegime regime);

/// Finite-n normal approximation of each block's embedded rows.
/// ASE: N(sqrt(rho) nu_k, Sigma_k / n).
/// LSE: N(nu_k / sqrt(n nu_k^T mu), Sigma~_k / (rho n^2)).
/// Block sizes are taken as n pi_k.
std::vector<GaussianParams> sbm_block_gaussians(const MixtureOfPointMasses& f,
                                                Method method,
                                                RhoRegime regime, int n,
                                                double rho = 1.0);

/// Almost-sure limit of ||Xhat W - rho^{1/2} X||_F^2: E_x tr Sigma(x).
double ase_frobenius_limit(const MixtureOfPointMasses& f, RhoRegime regime);

/// Limit of n rho ||Xbreve W - Xtilde||_F^2 as the double sum
/// tr E[g(X1, X2) w(X1, X2)] over independent pairs.
double lse_frobenius_limit(const MixtureOfPointMasses& f, RhoRegime regime);

/// The same limit from the expanded single/double-sum expression; agrees
/// with lse_frobenius_limit to roundoff.
double lse_frobenius_limit_expanded(const MixtureOfPointMasses& f,
                                    RhoRegime regime);

/// Limit of n^2 times the within-block variance of block k (0-based),
/// measured on unscaled eigenvectors.
double within_block_limit(const MixtureOfPointMasses& f, int k, Method method,
                          RhoRegime regime);

/// Dense-regime within-block limit written directly in terms of an
/// invertible B and pi. Throws SingularB.
double within_block_closed_form(const Matrix& block_probs,
                                const Vector& weights, int k, Method method);

/// Mean squared distance from the block-k rows of `eigenvectors` to the
/// centroid of the block-l rows. Throws EmptyBlock.
double empirical_within_block(const Matrix& eigenvectors, const Labels& labels,
                              int k, int l);

}  // namespace rdpg
