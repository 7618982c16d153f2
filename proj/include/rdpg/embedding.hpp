#pragma once

#include "rdpg/eigensolver.hpp"
#include "rdpg/types.hpp"

namespace rdpg {

/// Spectral embedding of a graph. `rows` is n x dim; `eigenvectors` and
/// `eigenvalues` are the unscaled pairs the rows were built from.
struct Embedding {
  Matrix rows;
  Method method = Method::Ase;
  int dim = 0;
  Matrix eigenvectors;
  Vector eigenvalues;
};

struct AlignmentResult {
  Matrix rotation;  // d x d orthogonal
  double residual_frobenius = 0.0;
  /// Y^T X had numerical rank below d, so the minimizer is not unique.
  bool degenerate = false;
};

/// diag(M 1)^{-1/2} M diag(M 1)^{-1/2}. Throws ZeroDegreeVertex on the first
/// row whose sum is not strictly positive.
Matrix normalized_laplacian(const Matrix& m);

/// U S^{1/2} from the d eigenpairs of largest magnitude. Throws
/// NegativeTopEigenvalue if any of them is negative.
Embedding ase(const Matrix& adjacency, int d,
              EigenBackend backend = EigenBackend::Auto);

/// Same construction on normalized_laplacian(adjacency), keeping the d
/// algebraically largest eigenvalues.
Embedding lse(const Matrix& adjacency, int d,
              EigenBackend backend = EigenBackend::Auto);

Embedding embed(const Matrix& adjacency, int d, Method method,
                EigenBackend backend = EigenBackend::Auto);

/// Orthogonal W minimizing ||Y W - X||_F, computed as U V^T from the SVD of
/// Y^T X.
AlignmentResult procrustes_align(const Matrix& y, const Matrix& x);

/// Row i scaled by (sum_j X_i^T X_j)^{-1/2}: the latent positions the
/// Laplacian embedding estimates. Throws ZeroExpectedDegree.
Matrix tilde_latents(const Matrix& latents);

}  // namespace rdpg
