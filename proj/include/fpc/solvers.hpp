#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpc/dense_matrix.hpp"
#include "fpc/linalg.hpp"
#include "fpc/operators.hpp"

namespace fpc {

enum class SvdMode { Exact, Approximate };

/// All solver knobs. Defaults are the standard parameter set: final
/// regularization mu_bar = 1e-8, reduction factor 1/4, step tau = 1,
/// xtol = 1e-10, gtol = 1e-4, at most 500 inner iterations per stage.
struct SolverConfig {
  double mu_bar = 1e-8;
  double eta_mu = 0.25;
  double tau = 1.0;
  double xtol = 1e-10;
  double gtol = 1e-4;
  int inner_max = 500;

  SvdMode svd_mode = SvdMode::Exact;
  double eps_ks = 1e-2;        // approximate mode: adaptive rank cutoff
  int cs_override = 0;         // approximate mode: sampled columns; 0 = default
  std::uint64_t svd_seed = 0;  // approximate mode: sampling stream

  bool use_gtol_rule = false;  // additionally require the spectral stopping rule
  bool debias = false;         // re-fit singular values when progress stalls
  double debias_trigger = 10.0;

  int bregman_outer = 3;  // outer iterations for bregman_solve

  // Permits tau to sit exactly on the 2/L stability boundary (the "easy
  // problem" profile does this with tau = 2 on an entry mask).
  bool allow_tau_at_bound = false;

  struct IterateInfo {
    int stage = 0;            // continuation stage index
    double mu = 0.0;
    int iteration = 0;        // 1-based within the stage
    double objective = 0.0;   // mu*||X||_* + 0.5*||A(X)-b||^2 at the step's start
    double step_norm = 0.0;   // ||X_next - X||_F
    double residual_sq = 0.0; // ||A(X)-b||^2 at the step's start
    int rank = 0;             // rank of X_next
    int ks = 0;               // approximate-mode target rank (0 in exact mode)
  };
  std::function<void(const IterateInfo&)> on_iterate;
};

struct SolveReport {
  DenseMatrix X_opt;
  int final_rank = 0;
  std::vector<double> mu_path;           // strictly decreasing, ends at mu_bar
  std::vector<int> inner_iterations;     // per stage
  std::vector<double> stage_fp_residual; // ||X - S(X - tau g)||_F / max(1,||X||_F)
                                         // at each stage's exit (exact mode only)
  double residual_norm = 0.0;            // ||A(X_opt) - b||_2
  double elapsed_seconds = 0.0;
  long svd_calls = 0;
  std::vector<int> ks_history;           // per-iteration target rank (approximate mode)
  std::vector<double> outer_residuals;   // ||A(X^k) - b||_2 per outer pass (bregman)
  std::vector<std::string> warnings;
};

/// Thrown when the solver detects a numerical fault (persistently increasing
/// objective in exact mode).
struct SolverFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using SvdBackend = std::function<SvdFactors(const DenseMatrix&)>;

struct ProxStepResult {
  DenseMatrix X_next;
  DenseMatrix Y;        // X - tau * grad
  DenseMatrix grad;     // gradient at the input X
  SvdFactors factors;   // factors of X_next (post-shrink)
  double residual_sq = 0.0;  // ||A(X)-b||^2 at the input X
};

/// One forward-gradient/shrink step: Y = X - tau*A*(A(X)-b), X_next the
/// spectral soft-threshold of Y at level tau*mu. `svd` defaults to the exact
/// factorization.
ProxStepResult prox_step(const DenseMatrix& X, const MeasurementMap& map,
                         const std::vector<double>& b, double tau, double mu,
                         const SvdBackend& svd = {});

/// ||X_next - X_prev||_F / max(1, ||X_prev||_F) < xtol
bool stopping_x(const DenseMatrix& X_prev, const DenseMatrix& X_next, double xtol);

/// sigma_1(U V^T + g/mu) - 1 < gtol, with (U, V) the factors of the current
/// iterate and g its gradient.
bool stopping_g(const SvdFactors& factors, const DenseMatrix& g, double mu,
                double gtol);

/// Best nonnegative re-fit of the singular values with the singular vectors
/// frozen: argmin over sigma >= 0 of ||A(U Diag(sigma) V^T) - b||_2, by
/// projected gradient. Empty input factors produce an empty result.
std::vector<double> debias(const SvdFactors& factors, const MeasurementMap& map,
                           const std::vector<double>& b);

/// Fixed-point continuation: starts from X = 0 (or X0), sweeps mu down a
/// geometric schedule from eta_mu*sigma_1(A*b) to mu_bar, and within each
/// stage iterates prox_step until the configured stopping rules fire or
/// inner_max is reached.
SolveReport fpc_solve(const MeasurementMap& map, const std::vector<double>& b,
                      const SolverConfig& cfg);
SolveReport fpc_solve(const MeasurementMap& map, const std::vector<double>& b,
                      const SolverConfig& cfg, const DenseMatrix& X0);

/// Outer regularization loop: repeatedly solves with the residual-corrected
/// right-hand side b + (b^k - A(X^k)), warm-starting each pass from the
/// previous solution. bregman_outer = 1 is exactly fpc_solve.
SolveReport bregman_solve(const MeasurementMap& map, const std::vector<double>& b,
                          const SolverConfig& cfg);

/// Named presets: "fpc1" (exact SVD, x-rule), "fpc2" (exact, x- and g-rules),
/// "fpc3" (exact, x-rule, debiasing), "fpca" (approximate SVD, xtol 1e-6),
/// "fpca-easy" (approximate, loose tolerances, tau = 2), "bregman" (fpc2
/// inner solves, 3 outer passes). Throws std::invalid_argument for unknown
/// names.
SolverConfig profile_config(const std::string& name);

/// Dispatches to fpc_solve or bregman_solve according to the profile name,
/// running with `cfg` (which may carry caller overrides on the stock
/// profile). Unknown names are rejected.
SolveReport solve_with_profile(const std::string& profile,
                               const MeasurementMap& map,
                               const std::vector<double>& b,
                               const SolverConfig& cfg);

}  // namespace fpc
