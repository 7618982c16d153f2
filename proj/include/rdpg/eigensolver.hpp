#pragma once

#include "rdpg/types.hpp"

namespace rdpg {

/// ByMagnitude: |lambda| descending, ties by value descending, then index.
/// ByValue: lambda descending, ties by index.
enum class EigenOrder { ByMagnitude, ByValue };

/// Dense runs a full tridiagonal QR decomposition. Krylov runs a block
/// Krylov-Schur iteration that only resolves the wanted pairs; it is the
/// only practical route for Monte Carlo at n in the thousands on one core.
/// Auto picks Dense for small n and Krylov otherwise, falling back to
/// Dense if the iteration does not converge.
enum class EigenBackend { Auto, Dense, Krylov };

struct EigenPairs {
  Vector values;   // d
  Matrix vectors;  // n x d, orthonormal columns
};

/// Top-d eigenpairs of a symmetric matrix.
///
/// Each eigenvector is signed so that its largest-magnitude coordinate is
/// positive (first such index on ties). Throws ConvergenceFailure if the
/// chosen backend cannot reach its tolerance.
EigenPairs symmetric_eig_top(const Matrix& m, int d, EigenOrder order,
                             EigenBackend backend = EigenBackend::Auto);

/// Largest |eigenvalue| of a symmetric matrix. Auto uses the dense
/// eigenvalue-only path: matrices of interest here (noise differences) have
/// no spectral gap, so Krylov would crawl.
double symmetric_spectral_norm(const Matrix& m,
                               EigenBackend backend = EigenBackend::Auto);

/// Orders candidate eigenvalues under `order` and returns the first d indices.
std::vector<int> select_top(const Vector& values, int d, EigenOrder order);

/// Applies the sign convention above to every column in place.
void canonicalize_signs(Matrix& vectors);

}  // namespace rdpg
