#include "rdpg/limit_laws.hpp"

#include <cmath>

#include "rdpg/errors.hpp"

namespace rdpg {
namespace {

constexpr double kSingularTolerance = 1e-12;

Matrix spd_inverse(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  const Vector& values = eig.eigenvalues();
  if (values.size() == 0 ||
      values.minCoeff() <= kSingularTolerance * values.cwiseAbs().maxCoeff()) {
    throw SingularDelta();
  }
  return eig.eigenvectors() * values.cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose();
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// x^T nu - (x^T nu)^2 in the dense regime, x^T nu otherwise.
double edge_variance(double inner, RhoRegime regime) {
  return regime == RhoRegime::Dense ? inner - inner * inner : inner;
}

// Atom-wise X^T mu; callers have already validated positivity via moments().
Vector mean_inner_products(const MixtureOfPointMasses& f,
                           const MixtureMoments& m) {
  return f.atoms * m.mu;
}

// E[X X^T (x^T X - (x^T X)^2)] or its vanishing analogue.
Matrix weighted_second_moment(const MixtureOfPointMasses& f, const Vector& x,
                              RhoRegime regime) {
  const int d = f.dim();
  Matrix acc = Matrix::Zero(d, d);
  for (int k = 0; k < f.num_blocks(); ++k) {
    const Vector nu = f.atoms.row(k).transpose();
    acc += f.weights(k) * edge_variance(x.dot(nu), regime) * nu * nu.transpose();
  }
  return acc;
}

// E[(Dt^{-1} X/(X^T mu) - c)(...)^T * weight(X)] for a fixed shift c.
template <typename Weight>
Matrix shifted_outer_expectation(const MixtureOfPointMasses& f,
                                 const Matrix& delta_tilde_inv,
                                 const Vector& atom_mean_inner,
                                 const Vector& shift, Weight weight) {
  const int d = f.dim();
  Matrix acc = Matrix::Zero(d, d);
  for (int k = 0; k < f.num_blocks(); ++k) {
    const Vector nu = f.atoms.row(k).transpose();
    const Vector v = delta_tilde_inv * nu / atom_mean_inner(k) - shift;
    acc += f.weights(k) * weight(nu) * v * v.transpose();
  }
  return acc;
}

void check_dimension(const MixtureOfPointMasses& f, const Vector& x) {
  if (x.size() != f.dim()) {
    throw DimensionMismatch("evaluation point has the wrong dimension");
  }
}

void check_block(const MixtureOfPointMasses& f, int k) {
  if (k < 0 || k >= f.num_blocks()) {
    throw DimensionMismatch("block index out of range");
  }
}

}  // namespace

void GaussianParams::validate() const {
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
    throw DimensionMismatch("Gaussian mean and covariance disagree on d");
  }
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw NotPsd(0.0);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-10) {
    throw NotPsd(eig.eigenvalues().minCoeff());
  }
}

MixtureMoments moments(const MixtureOfPointMasses& f) {
  f.validate();
  const int d = f.dim();
  MixtureMoments m;
  m.mu = f.atoms.transpose() * f.weights;
  m.delta = f.second_moment();
  m.mu_tilde = Vector::Zero(d);
  m.delta_tilde = Matrix::Zero(d, d);
  for (int k = 0; k < f.num_blocks(); ++k) {
    const Vector nu = f.atoms.row(k).transpose();
    const double inner = nu.dot(m.mu);
    if (!(inner > 0.0)) throw NonpositiveMeanInnerProduct(k);
    m.mu_tilde += f.weights(k) * nu / inner;
    m.delta_tilde += f.weights(k) * nu * nu.transpose() / inner;
  }
  return m;
}

Matrix ase_row_cov(const MixtureOfPointMasses& f, const Vector& x,
                   RhoRegime regime) {
  f.validate();
  check_dimension(f, x);
  const Matrix delta_inv = spd_inverse(f.second_moment());
  return symmetrized(delta_inv * weighted_second_moment(f, x, regime) *
                     delta_inv);
}

Matrix lse_row_cov(const MixtureOfPointMasses& f, const Vector& x,
                   RhoRegime regime) {
  const MixtureMoments m = moments(f);
  check_dimension(f, x);
  const double x_mean = x.dot(m.mu);
  if (!(x_mean > 0.0)) throw NonpositiveMeanInnerProduct(-1);
  const Matrix dt_inv = spd_inverse(m.delta_tilde);
  const Vector shift = x / (2.0 * x_mean);
  return symmetrized(shifted_outer_expectation(
      f, dt_inv, mean_inner_products(f, m), shift, [&](const Vector& nu) {
        return edge_variance(x.dot(nu), regime) / x_mean;
      }));
}

std::vector<GaussianParams> sbm_block_gaussians(const MixtureOfPointMasses& f,
                                                Method method,
                                                RhoRegime regime, int n,
                                                double rho) {
  if (n < 1) throw InvalidMixture("sample size must be at least 1");
  if (!(rho > 0.0 && rho <= 1.0)) {
    throw InvalidMixture("sparsity factor must lie in (0, 1]");
  }
  const MixtureMoments m = moments(f);
  const double nn = static_cast<double>(n);
  std::vector<GaussianParams> out;
  out.reserve(f.num_blocks());
  for (int k = 0; k < f.num_blocks(); ++k) {
    const Vector nu = f.atoms.row(k).transpose();
    GaussianParams g;
    if (method == Method::Ase) {
      g.mean = std::sqrt(rho) * nu;
      g.cov = ase_row_cov(f, nu, regime) / nn;
    } else {
      g.mean = nu / std::sqrt(nn * nu.dot(m.mu));
      g.cov = lse_row_cov(f, nu, regime) / (rho * nn * nn);
    }
    out.push_back(std::move(g));
  }
  return out;
}

double ase_frobenius_limit(const MixtureOfPointMasses& f, RhoRegime regime) {
  double total = 0.0;
  for (int k = 0; k < f.num_blocks(); ++k) {
    total += f.weights(k) *
             ase_row_cov(f, f.atoms.row(k).transpose(), regime).trace();
  }
  return total;
}

double lse_frobenius_limit(const MixtureOfPointMasses& f, RhoRegime regime) {
  const MixtureMoments m = moments(f);
  const Matrix dt_inv = spd_inverse(m.delta_tilde);
  const Vector s = mean_inner_products(f, m);
  double total = 0.0;
  // X2 is the conditioning row; X1 runs over the expectation.
  for (int b = 0; b < f.num_blocks(); ++b) {
    const Vector x2 = f.atoms.row(b).transpose();
    const Vector shift = x2 / (2.0 * s(b));
    const Matrix inner = shifted_outer_expectation(
        f, dt_inv, s, shift, [&](const Vector& x1) {
          return edge_variance(x1.dot(x2), regime) / s(b);
        });
    total += f.weights(b) * inner.trace();
  }
  return total;
}

double lse_frobenius_limit_expanded(const MixtureOfPointMasses& f,
                                    RhoRegime regime) {
  const MixtureMoments m = moments(f);
  const Matrix dt_inv = spd_inverse(m.delta_tilde);
  const Matrix dt_inv2 = dt_inv * dt_inv;
  const Vector s = mean_inner_products(f, m);
  const int blocks = f.num_blocks();

  double single = 0.0;
  for (int a = 0; a < blocks; ++a) {
    const Vector x = f.atoms.row(a).transpose();
    double scalar = x.dot(m.mu_tilde);
    if (regime == RhoRegime::Dense) scalar -= x.dot(m.delta_tilde * x);
    const double s2 = s(a) * s(a);
    single += f.weights(a) *
              (x.dot(dt_inv2 * x) * scalar / s2 - 0.75 * x.squaredNorm() / s2);
  }
  if (regime == RhoRegime::Vanishing) return single;

  double pairs = 0.0;
  for (int a = 0; a < blocks; ++a) {
    const Vector x1 = f.atoms.row(a).transpose();
    for (int b = 0; b < blocks; ++b) {
      const Vector x2 = f.atoms.row(b).transpose();
      const double inner = x1.dot(x2);
      // tr(Dt^{-1} x1 x1^T x2 x2^T) = (x2^T Dt^{-1} x1)(x1^T x2).
      pairs += f.weights(a) * f.weights(b) * x2.dot(dt_inv * x1) * inner *
               inner / (s(a) * s(b) * s(b));
    }
    pairs -= f.weights(a) * x1.squaredNorm() * x1.dot(m.delta * x1) /
             (4.0 * s(a) * s(a) * s(a));
  }
  return single + pairs;
}

double within_block_limit(const MixtureOfPointMasses& f, int k, Method method,
                          RhoRegime regime) {
  check_block(f, k);
  const Vector nu_k = f.atoms.row(k).transpose();
  if (method == Method::Ase) {
    const Matrix delta_inv = spd_inverse(f.second_moment());
    const Matrix cube = delta_inv * delta_inv * delta_inv;
    return (cube * weighted_second_moment(f, nu_k, regime)).trace();
  }
  const MixtureMoments m = moments(f);
  const Matrix dt_inv = spd_inverse(m.delta_tilde);
  const Vector s = mean_inner_products(f, m);
  const double s_k = s(k);
  const Vector shift = m.delta_tilde * nu_k / (2.0 * s_k);
  // Same shape as the row covariance but without the leading Dt^{-1}.
  const Matrix expectation = shifted_outer_expectation(
      f, Matrix::Identity(f.dim(), f.dim()), s, shift, [&](const Vector& x1) {
        return edge_variance(nu_k.dot(x1), regime) / s_k;
      });
  return (dt_inv * dt_inv * dt_inv * expectation).trace();
}

double within_block_closed_form(const Matrix& block_probs,
                                const Vector& weights, int k, Method method) {
  const int blocks = static_cast<int>(block_probs.rows());
  if (block_probs.cols() != blocks || weights.size() != blocks) {
    throw DimensionMismatch("block matrix and weights disagree on K");
  }
  if (k < 0 || k >= blocks) throw DimensionMismatch("block index out of range");
  Eigen::FullPivLU<Matrix> lu(block_probs);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) throw SingularB();
  const Matrix inv = lu.inverse();
  const Vector z =
      (block_probs.row(k).array() * (1.0 - block_probs.row(k).array()))
          .transpose();

  if (method == Method::Ase) {
    double total = 0.0;
    for (int l = 0; l < blocks; ++l) {
      for (int lp = 0; lp < blocks; ++lp) {
        total += z(l) * inv(l, lp) * inv(l, lp) / (weights(l) * weights(lp));
      }
    }
    return total;
  }

  const Vector mu = block_probs * weights;
  double zeta1 = 0.0;
  for (int l = 0; l < blocks; ++l) {
    for (int lp = 0; lp < blocks; ++lp) {
      zeta1 += z(l) * inv(l, lp) * inv(l, lp) * mu(lp) /
               (weights(l) * weights(lp) * mu(k));
    }
  }
  double zeta2 = 0.0;
  double expected_variance = 0.0;
  for (int l = 0; l < blocks; ++l) {
    zeta2 += z(l) * inv(k, l);
    expected_variance += weights(l) * z(l);
  }
  zeta2 /= weights(k) * mu(k);
  const double zeta3 = expected_variance / (4.0 * weights(k) * mu(k) * mu(k));
  return zeta1 - zeta2 + zeta3;
}

double empirical_within_block(const Matrix& eigenvectors, const Labels& labels,
                              int k, int l) {
  if (static_cast<Eigen::Index>(labels.size()) != eigenvectors.rows()) {
    throw DimensionMismatch("labels and eigenvector rows disagree on n");
  }
  Vector centroid = Vector::Zero(eigenvectors.cols());
  int count_l = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == l) {
      centroid += eigenvectors.row(i).transpose();
      ++count_l;
    }
  }
  if (count_l == 0) throw EmptyBlock(l);
  centroid /= count_l;

  double total = 0.0;
  int count_k = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == k) {
      total += (eigenvectors.row(i).transpose() - centroid).squaredNorm();
      ++count_k;
    }
  }
  if (count_k == 0) throw EmptyBlock(k);
  return total / count_k;
}

}  // namespace rdpg
