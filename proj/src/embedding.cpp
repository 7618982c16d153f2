#include "rdpg/embedding.hpp"

#include <cmath>

#include "rdpg/errors.hpp"

namespace rdpg {
namespace {

constexpr double kNegativeSlack = 1e-10;

Embedding scaled_embedding(const Matrix& m, int d, EigenOrder order,
                           Method method, EigenBackend backend) {
  EigenPairs pairs = symmetric_eig_top(m, d, order, backend);
  Embedding out;
  out.method = method;
  out.dim = d;
  out.rows = pairs.vectors;
  for (int c = 0; c < d; ++c) {
    const double value = pairs.values(c);
    if (value < (method == Method::Lse ? -kNegativeSlack : 0.0)) {
      throw NegativeTopEigenvalue(c, value);
    }
    out.rows.col(c) *= std::sqrt(std::max(value, 0.0));
  }
  out.eigenvectors = std::move(pairs.vectors);
  out.eigenvalues = std::move(pairs.values);
  return out;
}

}  // namespace

Matrix normalized_laplacian(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch("Laplacian input must be square");
  }
  const Vector degrees = m.rowwise().sum();
  for (Eigen::Index i = 0; i < degrees.size(); ++i) {
    if (!(degrees(i) > 0.0)) throw ZeroDegreeVertex(static_cast<std::size_t>(i));
  }
  const Vector scale = degrees.cwiseSqrt().cwiseInverse();
  Matrix out = m;
  out.array().colwise() *= scale.array();
  out.array().rowwise() *= scale.transpose().array();
  return out;
}

Embedding ase(const Matrix& adjacency, int d, EigenBackend backend) {
  return scaled_embedding(adjacency, d, EigenOrder::ByMagnitude, Method::Ase,
                          backend);
}

Embedding lse(const Matrix& adjacency, int d, EigenBackend backend) {
  return scaled_embedding(normalized_laplacian(adjacency), d,
                          EigenOrder::ByValue, Method::Lse, backend);
}

Embedding embed(const Matrix& adjacency, int d, Method method,
                EigenBackend backend) {
  return method == Method::Ase ? ase(adjacency, d, backend)
                               : lse(adjacency, d, backend);
}

AlignmentResult procrustes_align(const Matrix& y, const Matrix& x) {
  if (y.rows() != x.rows() || y.cols() != x.cols()) {
    throw DimensionMismatch("Procrustes inputs must have the same shape");
  }
  const Matrix cross = y.transpose() * x;
  Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  AlignmentResult out;
  out.rotation = svd.matrixU() * svd.matrixV().transpose();
  out.residual_frobenius = (y * out.rotation - x).norm();
  const Vector& sv = svd.singularValues();
  out.degenerate = sv.size() > 0 &&
                   (sv(0) == 0.0 || sv(sv.size() - 1) <= 1e-10 * sv(0));
  return out;
}

Matrix tilde_latents(const Matrix& latents) {
  const Vector column_sums = latents.colwise().sum().transpose();
  const Vector expected_degree = latents * column_sums;
  Matrix out = latents;
  for (Eigen::Index i = 0; i < latents.rows(); ++i) {
    if (!(expected_degree(i) > 0.0)) {
      throw ZeroExpectedDegree(static_cast<std::size_t>(i));
    }
    out.row(i) /= std::sqrt(expected_degree(i));
  }
  return out;
}

}  // namespace rdpg
