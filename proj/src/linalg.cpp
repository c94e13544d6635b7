#include "fpc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fpc/kernels.hpp"

namespace fpc {

namespace {

// Rotation threshold: columns i, j count as orthogonal once
// |<w_i, w_j>| <= kOrthTol * ||w_i|| * ||w_j||. This also bounds the final
// U^T U off-diagonals by kOrthTol.
constexpr double kOrthTol = 1e-14;
constexpr int kMaxSweeps = 60;
constexpr double kRankTol = 1e-12;  // truncate sigma_i <= kRankTol * sigma_1

struct JacobiRotation {
  double c;
  double s;
};

// Coefficients that annihilate <w_i, w_j> for the update
//   w_i' = c w_i - s w_j,  w_j' = s w_i + c w_j.
JacobiRotation make_rotation(double alpha, double beta, double gamma) {
  const double zeta = (beta - alpha) / (2.0 * gamma);
  const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  return {c, t * c};
}

// One-sided Jacobi on W whose rows are the columns of the operand Z
// (Z is mz×nz with mz >= nz, W is nz×mz). Vt accumulates the right factor,
// rows of Vt = columns of V.
void jacobi_sweeps(DenseMatrix& W, DenseMatrix& Vt) {
  const int nz = W.rows();
  const std::size_t mz = static_cast<std::size_t>(W.cols());
  const std::size_t vlen = static_cast<std::size_t>(Vt.cols());

  std::vector<double> norms(static_cast<std::size_t>(nz));
  for (int i = 0; i < nz; ++i) norms[i] = kernels::sumsq(W.row(i), mz);

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (int i = 0; i < nz - 1; ++i) {
      for (int j = i + 1; j < nz; ++j) {
        const double gamma = kernels::dot(W.row(i), W.row(j), mz);
        if (gamma == 0.0) continue;
        const double alpha = norms[i];
        const double beta = norms[j];
        if (gamma * gamma <= kOrthTol * kOrthTol * alpha * beta) continue;
        const JacobiRotation r = make_rotation(alpha, beta, gamma);
        kernels::rot(W.row(i), W.row(j), r.c, r.s, mz);
        kernels::rot(Vt.row(i), Vt.row(j), r.c, r.s, vlen);
        norms[i] = kernels::sumsq(W.row(i), mz);
        norms[j] = kernels::sumsq(W.row(j), mz);
        rotated = true;
      }
    }
    if (!rotated) break;
  }
}

}  // namespace

DenseMatrix reconstruct(const SvdFactors& f, int rows, int cols) {
  if (f.rank() == 0) return DenseMatrix(rows, cols);
  const int k = f.rank();
  DenseMatrix scaled(rows, k);
  for (int i = 0; i < rows; ++i) {
    kernels::mul_elem(f.U.row(i), f.sigma.data(), scaled.row(i),
                      static_cast<std::size_t>(k));
  }
  return matmul_nt(scaled, f.V);
}

SvdFactors full_svd(const DenseMatrix& A) {
  require_finite(A, "full_svd input");
  const int m = A.rows();
  const int n = A.cols();
  const bool transposed = m < n;

  // W rows are the columns of Z, where Z = A (m >= n) or Z = A^T.
  DenseMatrix W = transposed ? A : transpose(A);
  const int nz = W.rows();
  DenseMatrix Vt = DenseMatrix::identity(nz);

  jacobi_sweeps(W, Vt);

  std::vector<double> sigma(static_cast<std::size_t>(nz));
  for (int i = 0; i < nz; ++i) {
    sigma[static_cast<std::size_t>(i)] =
        std::sqrt(kernels::sumsq(W.row(i), static_cast<std::size_t>(W.cols())));
  }
  std::vector<int> order(static_cast<std::size_t>(nz));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return sigma[static_cast<std::size_t>(a)] > sigma[static_cast<std::size_t>(b)];
  });

  const double sigma_max = sigma[static_cast<std::size_t>(order[0])];
  int k = 0;
  while (k < nz && sigma[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] >
                       kRankTol * sigma_max) {
    ++k;
  }

  SvdFactors f;
  f.approximate = false;
  if (k == 0) return f;

  const int mz = W.cols();
  DenseMatrix Uz(mz, k);
  DenseMatrix Vz(nz, k);
  f.sigma.resize(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    const int idx = order[static_cast<std::size_t>(c)];
    const double s = sigma[static_cast<std::size_t>(idx)];
    f.sigma[static_cast<std::size_t>(c)] = s;
    const double* w = W.row(idx);
    const double* v = Vt.row(idx);
    const double inv = 1.0 / s;
    for (int r = 0; r < mz; ++r) Uz(r, c) = w[r] * inv;
    for (int r = 0; r < nz; ++r) Vz(r, c) = v[r];
  }

  if (transposed) {
    f.U = std::move(Vz);
    f.V = std::move(Uz);
  } else {
    f.U = std::move(Uz);
    f.V = std::move(Vz);
  }
  return f;
}

double spectral_norm(const DenseMatrix& A, double tol) {
  require_finite(A, "spectral_norm input");
  if (tol <= 0.0) throw std::invalid_argument("spectral_norm tolerance must be positive");
  const int m = A.rows();
  const int n = A.cols();

  std::vector<double> v(static_cast<std::size_t>(n));
  std::vector<double> w(static_cast<std::size_t>(m));
  std::vector<double> z(static_cast<std::size_t>(n));

  // Deterministic starts: normalized all-ones, then unit vectors, in case a
  // start lies in the null space of A.
  for (int attempt = 0; attempt <= n; ++attempt) {
    if (attempt == 0) {
      std::fill(v.begin(), v.end(), 1.0 / std::sqrt(static_cast<double>(n)));
    } else {
      std::fill(v.begin(), v.end(), 0.0);
      v[static_cast<std::size_t>(attempt - 1)] = 1.0;
    }

    double sigma_prev = -1.0;
    int quiet = 0;
    for (int it = 0; it < 50000; ++it) {
      matvec(A, v.data(), w.data());
      const double w2 = kernels::sumsq(w.data(), w.size());
      if (w2 == 0.0) break;  // start collapsed; try the next one
      const double sigma = std::sqrt(w2);
      if (sigma_prev >= 0.0 && std::abs(sigma - sigma_prev) <= 0.1 * tol * sigma) {
        if (++quiet >= 2) return sigma;
      } else {
        quiet = 0;
      }
      sigma_prev = sigma;
      matvec_t(A, w.data(), z.data());
      const double z2 = kernels::sumsq(z.data(), z.size());
      if (z2 == 0.0) break;
      const double inv = 1.0 / std::sqrt(z2);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = z[i] * inv;
    }
    if (sigma_prev > 0.0) return sigma_prev;  // hit the iteration cap
  }
  return 0.0;  // A maps every start to zero, i.e. A = 0
}

std::vector<double> shrink_vector(const std::vector<double>& x, double nu) {
  if (nu <= 0.0) throw std::invalid_argument("shrinkage level nu must be positive");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= 0.0)) {
      throw std::invalid_argument("shrink_vector requires nonnegative components");
    }
    out[i] = x[i] - nu > 0.0 ? x[i] - nu : 0.0;
  }
  return out;
}

ShrinkResult shrink_factors(const SvdFactors& fy, int rows, int cols, double nu) {
  if (nu <= 0.0) throw std::invalid_argument("shrinkage level nu must be positive");
  std::vector<int> kept;
  for (int i = 0; i < fy.rank(); ++i) {
    if (fy.sigma[static_cast<std::size_t>(i)] - nu > 0.0) kept.push_back(i);
  }

  ShrinkResult res;
  res.factors.approximate = fy.approximate;
  if (kept.empty()) {
    res.X = DenseMatrix(rows, cols);
    return res;
  }

  const int k = static_cast<int>(kept.size());
  res.factors.U = DenseMatrix(rows, k);
  res.factors.V = DenseMatrix(cols, k);
  res.factors.sigma.resize(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    const int src = kept[static_cast<std::size_t>(c)];
    res.factors.sigma[static_cast<std::size_t>(c)] =
        fy.sigma[static_cast<std::size_t>(src)] - nu;
    for (int r = 0; r < rows; ++r) res.factors.U(r, c) = fy.U(r, src);
    for (int r = 0; r < cols; ++r) res.factors.V(r, c) = fy.V(r, src);
  }
  res.X = reconstruct(res.factors, rows, cols);
  return res;
}

ShrinkResult shrink_matrix(const DenseMatrix& Y, double nu) {
  return shrink_factors(full_svd(Y), Y.rows(), Y.cols(), nu);
}

void sym_eig_psd(const DenseMatrix& G, std::vector<double>& eigvals,
                 DenseMatrix& eigvecs) {
  if (G.rows() != G.cols()) throw std::invalid_argument("sym_eig_psd needs a square matrix");
  require_finite(G, "sym_eig_psd input");
  const int n = G.rows();

  DenseMatrix B(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) B(i, j) = 0.5 * (G(i, j) + G(j, i));
  }
  // Rows of Qt are the eigenvectors.
  DenseMatrix Qt = DenseMatrix::identity(n);

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (int i = 0; i < n - 1; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double bij = B(i, j);
        if (bij == 0.0) continue;
        const double bii = B(i, i);
        const double bjj = B(j, j);
        if (bij * bij <= kOrthTol * kOrthTol * std::abs(bii * bjj)) continue;
        const double zeta = (bjj - bii) / (2.0 * bij);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // B <- J^T B J applied as row then column rotation.
        kernels::rot(B.row(i), B.row(j), c, s, static_cast<std::size_t>(n));
        for (int r = 0; r < n; ++r) {
          const double bri = B(r, i);
          const double brj = B(r, j);
          B(r, i) = c * bri - s * brj;
          B(r, j) = s * bri + c * brj;
        }
        B(i, j) = 0.0;
        B(j, i) = 0.0;
        kernels::rot(Qt.row(i), Qt.row(j), c, s, static_cast<std::size_t>(n));
        rotated = true;
      }
    }
    if (!rotated) break;
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return B(a, a) > B(b, b); });

  eigvals.assign(static_cast<std::size_t>(n), 0.0);
  eigvecs = DenseMatrix(n, n);
  for (int c = 0; c < n; ++c) {
    const int idx = order[static_cast<std::size_t>(c)];
    eigvals[static_cast<std::size_t>(c)] = std::max(B(idx, idx), 0.0);
    for (int r = 0; r < n; ++r) eigvecs(r, c) = Qt(idx, r);
  }
}

}  // namespace fpc
