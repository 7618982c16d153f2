#include "rdpg/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rdpg/errors.hpp"
#include "rdpg/random.hpp"

namespace rdpg {
namespace {

constexpr Eigen::Index kDenseCutoff = 300;
constexpr double kKrylovTolerance = 1e-11;
constexpr int kMaxRestarts = 200;
// Rayleigh-Ritz on the projected matrix costs O(basis^3); only solve it
// every few block steps.
constexpr int kCheckEvery = 3;
constexpr std::uint64_t kStartSeed = 0x6b72796c6f76ULL;

EigenPairs dense_top(const Matrix& m, int d, EigenOrder order) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  if (eig.info() != Eigen::Success) {
    throw ConvergenceFailure("dense symmetric eigensolver did not converge");
  }
  const std::vector<int> idx = select_top(eig.eigenvalues(), d, order);
  EigenPairs out;
  out.values.resize(d);
  out.vectors.resize(m.rows(), d);
  for (int c = 0; c < d; ++c) {
    out.values(c) = eig.eigenvalues()(idx[c]);
    out.vectors.col(c) = eig.eigenvectors().col(idx[c]);
  }
  return out;
}

// Orthonormalizes the columns of `block` against `basis` and each other with
// two Gram-Schmidt passes. Columns that vanish are replaced by random
// directions so the block keeps its width.
void orthonormalize_against(const Matrix& basis, Matrix& block, Rng& rng) {
  const Eigen::Index n = block.rows();
  for (Eigen::Index j = 0; j < block.cols(); ++j) {
    Vector v = block.col(j);
    double original = v.norm();
    for (int attempt = 0; attempt < 4; ++attempt) {
      for (int pass = 0; pass < 2; ++pass) {
        if (basis.cols() > 0) v -= basis * (basis.transpose() * v);
        if (j > 0) {
          v -= block.leftCols(j) * (block.leftCols(j).transpose() * v);
        }
      }
      const double norm = v.norm();
      if (original > 0.0 && norm > 1e-10 * original) {
        block.col(j) = v / norm;
        break;
      }
      for (Eigen::Index i = 0; i < n; ++i) v(i) = uniform01(rng) - 0.5;
      original = v.norm();
    }
  }
}

struct RitzState {
  Vector values;
  Matrix vectors;  // coordinates in the basis
};

RitzState rayleigh_ritz(const Matrix& projected) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(projected);
  if (eig.info() != Eigen::Success) {
    throw ConvergenceFailure("projected eigenproblem did not converge");
  }
  return {eig.eigenvalues(), eig.eigenvectors()};
}

EigenPairs krylov_top(const Matrix& m, int d, EigenOrder order) {
  const Eigen::Index n = m.rows();
  const Eigen::Index block_size = std::min<Eigen::Index>(n, std::max(d + 2, 4));
  const Eigen::Index max_basis =
      std::min<Eigen::Index>(n, std::max<Eigen::Index>(40 * block_size, 120));
  Rng rng = make_rng(kStartSeed);

  Matrix basis(n, 0);
  Matrix image(n, 0);  // m * basis
  Matrix projected(0, 0);
  Matrix block(n, block_size);
  for (Eigen::Index j = 0; j < block.cols(); ++j) {
    for (Eigen::Index i = 0; i < n; ++i) block(i, j) = uniform01(rng) - 0.5;
  }
  orthonormalize_against(basis, block, rng);

  int steps = 0;
  for (int restart = 0; restart <= kMaxRestarts; ++restart) {
    while (true) {
      const Eigen::Index old_cols = basis.cols();
      const Eigen::Index width = block.cols();
      // m is symmetric, and Eigen's kernel for a thin row-panel times a
      // square matrix is several times faster than the thin-column product.
      const Matrix block_image = (block.transpose() * m).transpose();
      basis.conservativeResize(Eigen::NoChange, old_cols + width);
      basis.rightCols(width) = block;
      image.conservativeResize(Eigen::NoChange, old_cols + width);
      image.rightCols(width) = block_image;

      const Matrix coupling = basis.transpose() * block_image;
      projected.conservativeResize(old_cols + width, old_cols + width);
      projected.rightCols(width) = coupling;
      projected.bottomRows(width) = coupling.transpose();
      projected = 0.5 * (projected + projected.transpose()).eval();

      ++steps;
      const bool full = basis.cols() + block_size > max_basis ||
                        basis.cols() + block_size > n;
      if (!full && steps % kCheckEvery != 0) {
        block = block_image - basis * coupling;
        orthonormalize_against(basis, block, rng);
        continue;
      }

      const RitzState ritz = rayleigh_ritz(projected);
      const std::vector<int> wanted = select_top(ritz.values, d, order);
      const double scale = ritz.values.cwiseAbs().maxCoeff();
      bool converged = basis.cols() >= d;
      EigenPairs out;
      out.values.resize(d);
      out.vectors.resize(n, d);
      for (int c = 0; c < d && converged; ++c) {
        const Vector coords = ritz.vectors.col(wanted[c]);
        const Vector u = basis * coords;
        const Vector r = image * coords - ritz.values(wanted[c]) * u;
        if (r.norm() > kKrylovTolerance * std::max(scale, 1e-300)) {
          converged = false;
        }
        out.values(c) = ritz.values(wanted[c]);
        out.vectors.col(c) = u;
      }
      if (converged) return out;
      if (basis.cols() == n) {
        // Invariant subspace is the whole space; the projection is exact.
        return out;
      }

      if (max_basis < n && basis.cols() + block_size > max_basis) {
        // Thick restart: keep the best Ritz vectors under `order` and continue
        // from their residual space.
        const Eigen::Index keep = std::min<Eigen::Index>(
            basis.cols() - block_size,
            std::max<Eigen::Index>(3 * block_size, d + block_size));
        const std::vector<int> kept =
            select_top(ritz.values, static_cast<int>(keep), order);
        Matrix selector(basis.cols(), keep);
        Vector kept_values(keep);
        for (Eigen::Index c = 0; c < keep; ++c) {
          selector.col(c) = ritz.vectors.col(kept[c]);
          kept_values(c) = ritz.values(kept[c]);
        }
        basis = (basis * selector).eval();
        image = (image * selector).eval();
        projected = kept_values.asDiagonal();
        Matrix residual = image - basis * projected;
        residual -= basis * (basis.transpose() * residual);
        Eigen::BDCSVD<Matrix> svd(residual, Eigen::ComputeThinU);
        block = svd.matrixU().leftCols(std::min(block_size, residual.cols()));
        orthonormalize_against(basis, block, rng);
        break;
      }

      block = block_image - basis * coupling;
      orthonormalize_against(basis, block, rng);
      if (basis.cols() + block.cols() > n) {
        block.conservativeResize(Eigen::NoChange, n - basis.cols());
      }
    }
  }
  throw ConvergenceFailure("block Krylov iteration did not reach tolerance");
}

}  // namespace

std::vector<int> select_top(const Vector& values, int d, EigenOrder order) {
  std::vector<int> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto before = [&](int a, int b) {
    const double va = values(a);
    const double vb = values(b);
    if (order == EigenOrder::ByMagnitude && std::abs(va) != std::abs(vb)) {
      return std::abs(va) > std::abs(vb);
    }
    if (va != vb) return va > vb;
    return a < b;
  };
  std::stable_sort(idx.begin(), idx.end(), before);
  idx.resize(std::min<std::size_t>(idx.size(), static_cast<std::size_t>(d)));
  return idx;
}

void canonicalize_signs(Matrix& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
      const double a = std::abs(vectors(r, c));
      if (a > best_abs) {
        best_abs = a;
        best = r;
      }
    }
    if (vectors(best, c) < 0.0) vectors.col(c) = -vectors.col(c);
  }
}

EigenPairs symmetric_eig_top(const Matrix& m, int d, EigenOrder order,
                             EigenBackend backend) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch("eigensolver input must be square");
  }
  if (d < 0 || d > m.rows()) {
    throw DimensionMismatch("requested more eigenpairs than the matrix order");
  }
  EigenPairs out;
  switch (backend) {
    case EigenBackend::Dense:
      out = dense_top(m, d, order);
      break;
    case EigenBackend::Krylov:
      out = krylov_top(m, d, order);
      break;
    case EigenBackend::Auto:
      if (m.rows() <= kDenseCutoff) {
        out = dense_top(m, d, order);
      } else {
        try {
          out = krylov_top(m, d, order);
        } catch (const ConvergenceFailure&) {
          out = dense_top(m, d, order);
        }
      }
      break;
  }
  canonicalize_signs(out.vectors);
  return out;
}

double symmetric_spectral_norm(const Matrix& m, EigenBackend backend) {
  if (backend == EigenBackend::Krylov) {
    return std::abs(
        symmetric_eig_top(m, 1, EigenOrder::ByMagnitude, backend).values(0));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) {
    throw ConvergenceFailure("dense symmetric eigensolver did not converge");
  }
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace rdpg
