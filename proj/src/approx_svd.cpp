#include "fpc/approx_svd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fpc/kernels.hpp"
#include "fpc/rng.hpp"

namespace fpc {

namespace {

// Positive-sigma floor: components below this fraction of sigma_1(C) are
// treated as zero so the 1/sigma factors in h^t and V stay finite. The floor
// deliberately sits far below what the Gram-route eigensolve can resolve
// (~1e-7*sigma_1): a component whose columns were only thinly covered by the
// draw still carries a valid direction, and its reconstructed magnitude comes
// from ||A^T h_t||, not from the (underestimated) sigma_t(C). Directions near
// the eigensolver's noise floor do come out skewed, which is why the lifted
// basis is re-orthonormalized below; a lift whose residual vanishes there is
// linearly dependent on the ones before it (e.g. a column drawn twice).
constexpr double kSigmaRelTol = 1e-12;
constexpr double kDependentTol = 1e-12;

void validate(int n, const ApproxSvdConfig& cfg) {
  if (cfg.cs < 1 || cfg.cs > n) {
    throw std::invalid_argument("approx svd: cs must satisfy 1 <= cs <= n");
  }
  if (cfg.ks < 1 || cfg.ks > cfg.cs) {
    throw std::invalid_argument("approx svd: ks must satisfy 1 <= ks <= cs");
  }
  if (!cfg.probabilities.empty()) {
    if (static_cast<int>(cfg.probabilities.size()) != n) {
      throw std::invalid_argument("approx svd: probabilities must have one entry per column");
    }
    double sum = 0.0;
    for (double p : cfg.probabilities) {
      if (!(p >= 0.0)) {
        throw std::invalid_argument("approx svd: probabilities must be nonnegative");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw std::invalid_argument("approx svd: probabilities must sum to 1");
    }
  }
}

}  // namespace

std::vector<double> column_norm_probabilities(const DenseMatrix& A) {
  const int n = A.cols();
  std::vector<double> p(static_cast<std::size_t>(n), 0.0);
  double total = 0.0;
  for (int i = 0; i < A.rows(); ++i) {
    const double* row = A.row(i);
    for (int j = 0; j < n; ++j) {
      p[static_cast<std::size_t>(j)] += row[j] * row[j];
    }
  }
  for (double v : p) total += v;
  if (total == 0.0) {
    std::fill(p.begin(), p.end(), 1.0 / n);
  } else {
    for (double& v : p) v /= total;
  }
  return p;
}

std::vector<int> sample_columns(int n, const ApproxSvdConfig& cfg) {
  validate(n, cfg);
  Rng rng(cfg.seed);
  std::vector<int> picks(static_cast<std::size_t>(cfg.cs));

  if (cfg.probabilities.empty()) {
    for (auto& pick : picks) {
      const double u = rng.uniform01() * n;
      pick = std::min(n - 1, static_cast<int>(u));
    }
    return picks;
  }

  const std::vector<double>& p = cfg.probabilities;
  int last_positive = 0;
  for (int i = 0; i < n; ++i) {
    if (p[static_cast<std::size_t>(i)] > 0.0) last_positive = i;
  }
  for (auto& pick : picks) {
    const double u = rng.uniform01();
    double cum = 0.0;
    int chosen = last_positive;
    for (int i = 0; i <= last_positive; ++i) {
      cum += p[static_cast<std::size_t>(i)];
      if (u < cum) {
        chosen = i;
        break;
      }
    }
    pick = chosen;
  }
  return picks;
}

SvdFactors linear_time_svd(const DenseMatrix& A, const ApproxSvdConfig& cfg) {
  require_finite(A, "linear_time_svd input");
  const int m = A.rows();
  const int n = A.cols();
  const std::vector<int> picks = sample_columns(n, cfg);
  const int cs = cfg.cs;

  // Rows of Ct are the sampled, rescaled columns of A.
  DenseMatrix Ct(cs, m);
  for (int t = 0; t < cs; ++t) {
    const int col = picks[static_cast<std::size_t>(t)];
    const double p = cfg.probabilities.empty()
                         ? 1.0 / n
                         : cfg.probabilities[static_cast<std::size_t>(col)];
    const double scale = 1.0 / std::sqrt(cs * p);
    double* out = Ct.row(t);
    for (int i = 0; i < m; ++i) out[i] = A(i, col) * scale;
  }

  // Gram matrix C^T C, then its eigensystem. sigma_t(C) = sqrt(lambda_t).
  DenseMatrix G(cs, cs);
  for (int s = 0; s < cs; ++s) {
    for (int t = s; t < cs; ++t) {
      const double v = kernels::dot(Ct.row(s), Ct.row(t), static_cast<std::size_t>(m));
      G(s, t) = v;
      G(t, s) = v;
    }
  }
  std::vector<double> lambda;
  DenseMatrix Y;
  sym_eig_psd(G, lambda, Y);

  std::vector<double> sigma(static_cast<std::size_t>(cs));
  for (int t = 0; t < cs; ++t) {
    sigma[static_cast<std::size_t>(t)] = std::sqrt(lambda[static_cast<std::size_t>(t)]);
  }

  SvdFactors f;
  f.approximate = true;
  if (sigma[0] <= 0.0) return f;  // every sampled column was zero

  int k = 0;
  while (k < cfg.ks && sigma[static_cast<std::size_t>(k)] > kSigmaRelTol * sigma[0]) ++k;
  if (k == 0) return f;

  // h^t = C y^t / sigma_t, assembled as rows of Ht.
  DenseMatrix Ht(k, m);
  for (int t = 0; t < k; ++t) {
    double* h = Ht.row(t);
    for (int s = 0; s < cs; ++s) {
      kernels::axpy(Y(s, t), Ct.row(s), h, static_cast<std::size_t>(m));
    }
    kernels::scal(1.0 / sigma[static_cast<std::size_t>(t)], h, static_cast<std::size_t>(m));
  }

  // The lifted directions are only as orthogonal as the Gram eigensolve was
  // accurate. Two Gram-Schmidt sweeps restore orthonormality; a direction
  // whose residual vanishes is dependent on the ones before it and is dropped
  // together with its sigma.
  int kept = 0;
  for (int t = 0; t < k; ++t) {
    if (t != kept) {
      std::copy(Ht.row(t), Ht.row(t) + m, Ht.row(kept));
    }
    double* h = Ht.row(kept);
    for (int pass = 0; pass < 2; ++pass) {
      for (int s = 0; s < kept; ++s) {
        const double c = kernels::dot(Ht.row(s), h, static_cast<std::size_t>(m));
        kernels::axpy(-c, Ht.row(s), h, static_cast<std::size_t>(m));
      }
    }
    const double nrm = std::sqrt(kernels::dot(h, h, static_cast<std::size_t>(m)));
    if (nrm < kDependentTol) continue;
    kernels::scal(1.0 / nrm, h, static_cast<std::size_t>(m));
    sigma[static_cast<std::size_t>(kept)] = sigma[static_cast<std::size_t>(t)];
    ++kept;
  }
  if (kept == 0) return f;
  if (kept < k) {
    DenseMatrix packed(kept, m);
    for (int t = 0; t < kept; ++t) {
      std::copy(Ht.row(t), Ht.row(t) + m, packed.row(t));
    }
    Ht = std::move(packed);
    k = kept;
  }

  // V^T = Diag(1/sigma) H^T A, one contiguous row per component.
  DenseMatrix Vt = matmul(Ht, A);
  for (int t = 0; t < k; ++t) {
    kernels::scal(1.0 / sigma[static_cast<std::size_t>(t)], Vt.row(t),
                  static_cast<std::size_t>(n));
  }

  f.U = transpose(Ht);
  f.V = transpose(Vt);
  f.sigma.assign(sigma.begin(), sigma.begin() + k);
  return f;
}

int adaptive_rank(const std::vector<double>& s, double eps_ks) {
  if (s.empty()) throw std::invalid_argument("adaptive_rank: empty spectrum");
  if (eps_ks <= 0.0) throw std::invalid_argument("adaptive_rank: eps_ks must be positive");
  const double mx = *std::max_element(s.begin(), s.end());
  if (mx == 0.0) return 1;
  int count = 0;
  for (double v : s) {
    if (v >= eps_ks * mx) ++count;
  }
  return count;
}

void RankController::record_step(bool expansion_violated) {
  if (!expansion_violated) return;
  if (++violation_count >= violation_limit) {
    probe_armed = true;
    violation_count = 0;
  }
}

int RankController::retarget(const std::vector<double>& prev_shrunk_sigma, int cs) {
  const int base = prev_shrunk_sigma.empty()
                       ? current_ks
                       : adaptive_rank(prev_shrunk_sigma, epsilon_ks);
  const int lift = probe_armed ? 1 : 0;
  probe_armed = false;
  current_ks = std::clamp(base + lift, 1, cs);
  return current_ks;
}

}  // namespace fpc
