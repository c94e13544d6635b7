#pragma once

#include <cstdint>
#include <vector>

#include "fpc/dense_matrix.hpp"
#include "fpc/linalg.hpp"

namespace fpc {

/// Parameters of the Monte Carlo column-sampling SVD. Defaults leave
/// `probabilities` empty, which means uniform 1/n.
struct ApproxSvdConfig {
  int cs = 1;                         // columns sampled, 1 <= cs <= n
  int ks = 1;                         // target rank, 1 <= ks <= cs
  std::vector<double> probabilities;  // length n, nonnegative, sums to 1
  std::uint64_t seed = 0;
};

/// Column-norm-proportional sampling weights p_i ∝ ||A^(i)||^2 (uniform when
/// A = 0). Alternative to the uniform default.
std::vector<double> column_norm_probabilities(const DenseMatrix& A);

/// The cs indices drawn i.i.d. (with replacement) from cfg's distribution.
/// Exposed so tests can replay the exact draw.
std::vector<int> sample_columns(int n, const ApproxSvdConfig& cfg);

/// Monte Carlo approximate SVD: sample cs columns, scale each by
/// 1/sqrt(cs*p_i), eigendecompose the small Gram matrix, lift the top ks
/// eigenvectors back through the sampled columns, and re-orthonormalize the
/// lifted basis (dropping exactly dependent lifts, e.g. from a column drawn
/// twice). Returns factors with approximate = true, V = A^T U Diag(1/sigma)
/// as produced. An all-zero sample yields an empty factorization.
SvdFactors linear_time_svd(const DenseMatrix& A, const ApproxSvdConfig& cfg);

/// Number of components no less than eps_ks * max(s); 1 when max(s) = 0.
int adaptive_rank(const std::vector<double>& s, double eps_ks);

/// Tracks non-expansiveness violations of the approximate shrinkage step.
/// After `violation_limit` of them the next draw probes one extra component.
/// If that component is genuine it survives the shrink, joins the spectrum,
/// and raises the adaptive count on its own; if it is sample noise the shrink
/// discards it and the target falls back. Either way the probe itself does
/// not accumulate, so a noisy run cannot ratchet the rank up to cs and drag
/// spurious directions into every iterate. A rank-starved iterate still
/// climbs, one confirmed component per `violation_limit` violations.
struct RankController {
  int current_ks = 1;
  double epsilon_ks = 1e-2;
  int violation_count = 0;
  int violation_limit = 10;
  bool probe_armed = false;  // one extra component on the next retarget

  void record_step(bool expansion_violated);

  /// New target rank from the previous iterate's shrunk spectrum: the
  /// adaptive count, plus one when a probe is armed, clamped to [1, cs]. An
  /// empty spectrum keeps the current target.
  int retarget(const std::vector<double>& prev_shrunk_sigma, int cs);
};

}  // namespace fpc
