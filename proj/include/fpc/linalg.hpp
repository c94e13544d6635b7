#pragma once

#include <vector>

#include "fpc/dense_matrix.hpp"

namespace fpc {

/// SVD triple A ≈ U Diag(sigma) V^T. For exact factorizations both U and V
/// have orthonormal columns; the Monte Carlo approximation keeps U orthonormal
/// but uses V = A^T U Diag(1/sigma) as produced, so V is only approximately
/// orthonormal and `approximate` is set.
struct SvdFactors {
  DenseMatrix U;              // m×k
  std::vector<double> sigma;  // nonincreasing, all > 0 after truncation
  DenseMatrix V;              // n×k
  bool approximate = false;

  int rank() const { return static_cast<int>(sigma.size()); }
};

// U Diag(sigma) V^T; the zero matrix of the given shape when rank = 0.
DenseMatrix reconstruct(const SvdFactors& f, int rows, int cols);

/// Exact SVD by one-sided (Hestenes) Jacobi. Deterministic for fixed input.
/// Singular values below 1e-12·sigma_1 are truncated, so rank() is the
/// numerical rank. Reconstruction holds to 1e-10·||A||_F.
SvdFactors full_svd(const DenseMatrix& A);

/// Largest singular value via power iteration on A^T A, deterministic
/// start vector (normalized all-ones, with fixed fallbacks if that vector
/// lies in the null space). Result accurate to relative `tol`.
double spectral_norm(const DenseMatrix& A, double tol = 1e-8);

/// Soft threshold on a nonnegative vector: out_i = x_i - nu when positive,
/// else 0 (strict inequality, so x_i = nu maps to 0).
std::vector<double> shrink_vector(const std::vector<double>& x, double nu);

struct ShrinkResult {
  DenseMatrix X;       // the shrunk matrix
  SvdFactors factors;  // factors of X, post-shrink, zero components dropped
};

/// Matrix shrinkage: soft-thresholds the spectrum of Y at level nu. This is
/// the proximal map of nu·||·||_* at Y.
ShrinkResult shrink_matrix(const DenseMatrix& Y, double nu);

/// Same spectrum rule applied to an existing factorization of Y (exact or
/// approximate). Columns whose singular value does not exceed nu are dropped.
ShrinkResult shrink_factors(const SvdFactors& fy, int rows, int cols, double nu);

/// Eigendecomposition of a symmetric PSD matrix by cyclic Jacobi rotations.
/// Eigenvalues are returned in nonincreasing order, negatives from roundoff
/// clamped to zero; eigvecs holds the eigenvectors as columns.
void sym_eig_psd(const DenseMatrix& G, std::vector<double>& eigvals,
                 DenseMatrix& eigvecs);

}  // namespace fpc
