#include "fpc/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "fpc/approx_svd.hpp"
#include "fpc/kernels.hpp"
#include "fpc/rng.hpp"

namespace fpc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Largest rank r with r(m+n-r) <= p.
int max_recoverable_rank(int m, int n, int p) {
  const double s = static_cast<double>(m) + static_cast<double>(n);
  const double disc = std::max(0.0, s * s - 4.0 * static_cast<double>(p));
  return static_cast<int>(std::floor((s - std::sqrt(disc)) / 2.0));
}

double sigma_sum(const SvdFactors& f) {
  double s = 0.0;
  for (double v : f.sigma) s += v;
  return s;
}

void validate_config(const SolverConfig& cfg) {
  if (!(cfg.mu_bar > 0.0)) throw std::invalid_argument("solver: mu_bar must be positive");
  if (!(cfg.eta_mu > 0.0 && cfg.eta_mu < 1.0)) {
    throw std::invalid_argument("solver: eta_mu must lie in (0,1)");
  }
  if (!(cfg.tau > 0.0)) throw std::invalid_argument("solver: tau must be positive");
  if (!(cfg.xtol > 0.0)) throw std::invalid_argument("solver: xtol must be positive");
  if (!(cfg.gtol > 0.0)) throw std::invalid_argument("solver: gtol must be positive");
  if (cfg.inner_max < 1) throw std::invalid_argument("solver: inner_max must be at least 1");
  if (!(cfg.eps_ks > 0.0)) throw std::invalid_argument("solver: eps_ks must be positive");
  if (!(cfg.debias_trigger > 0.0)) {
    throw std::invalid_argument("solver: debias_trigger must be positive");
  }
}

// Replaces the singular values of `factors` with `sigma`, dropping zeros, and
// rebuilds the matrix.
void apply_refit(const std::vector<double>& sigma, SvdFactors& factors,
                 DenseMatrix& X) {
  std::vector<int> kept;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    if (sigma[i] > 0.0) kept.push_back(static_cast<int>(i));
  }
  const int m = X.rows();
  const int n = X.cols();
  if (kept.empty()) {
    factors = SvdFactors{};
    factors.approximate = false;
    X = DenseMatrix(m, n);
    return;
  }
  SvdFactors out;
  out.approximate = factors.approximate;
  const int k = static_cast<int>(kept.size());
  out.U = DenseMatrix(m, k);
  out.V = DenseMatrix(n, k);
  out.sigma.resize(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    const int src = kept[static_cast<std::size_t>(c)];
    out.sigma[static_cast<std::size_t>(c)] = sigma[static_cast<std::size_t>(src)];
    for (int i = 0; i < m; ++i) out.U(i, c) = factors.U(i, src);
    for (int i = 0; i < n; ++i) out.V(i, c) = factors.V(i, src);
  }
  X = reconstruct(out, m, n);
  factors = std::move(out);
}

SolveReport solve_impl(const MeasurementMap& map, const std::vector<double>& b,
                       const SolverConfig& cfg, const DenseMatrix* X0) {
  validate_config(cfg);
  if (static_cast<int>(b.size()) != map.sample_count()) {
    throw std::invalid_argument("fpc_solve: measurement vector has the wrong length");
  }
  require_finite(b, "measurement vector");

  const int m = map.rows();
  const int n = map.cols();
  const double L = map.lipschitz_bound();
  SolveReport rep;
  if (cfg.tau * L >= 2.0) {
    if (cfg.allow_tau_at_bound && cfg.tau * L <= 2.0 * (1.0 + 1e-9)) {
      rep.warnings.push_back("tau sits on the 2/L stability boundary");
    } else {
      throw std::invalid_argument("fpc_solve: tau must be below 2/lipschitz_bound");
    }
  }
  const bool exact = cfg.svd_mode == SvdMode::Exact;
  const auto t0 = Clock::now();

  bool b_zero = true;
  for (double v : b) {
    if (v != 0.0) {
      b_zero = false;
      break;
    }
  }
  if (b_zero) {  // X = 0 is optimal for every mu > 0
    rep.X_opt = DenseMatrix(m, n);
    rep.mu_path = {cfg.mu_bar};
    rep.inner_iterations = {0};
    if (exact) rep.stage_fp_residual = {0.0};
    rep.elapsed_seconds = seconds_since(t0);
    return rep;
  }

  const DenseMatrix Asb = map.adjoint(b);
  {
    double mu = std::max(cfg.eta_mu * spectral_norm(Asb), cfg.mu_bar);
    rep.mu_path.push_back(mu);
    while (mu > cfg.mu_bar) {
      mu = std::max(mu * cfg.eta_mu, cfg.mu_bar);
      rep.mu_path.push_back(mu);
    }
  }

  DenseMatrix X(m, n);
  SvdFactors fx;
  double nuc_X = 0.0;
  if (X0 != nullptr) {
    if (X0->rows() != m || X0->cols() != n) {
      throw std::invalid_argument("fpc_solve: warm start has the wrong shape");
    }
    require_finite(*X0, "warm start");
    if (frobenius_norm(*X0) > 0.0) {
      X = *X0;
      fx = full_svd(X);
      ++rep.svd_calls;
      nuc_X = sigma_sum(fx);
    }
  }

  // The objective mu*||X||_* + 0.5*||A(X)-b||^2 is provably nonincreasing
  // per step only for tau <= 1/L; the fault guard watches it there.
  const bool guard_active = exact && cfg.tau * L <= 1.0 + 1e-12;
  const bool gtol_active = exact && cfg.use_gtol_rule && std::max(m, n) <= 200;

  int cs = 0;
  RankController ctrl;
  if (!exact) {
    const int rm = max_recoverable_rank(m, n, map.sample_count());
    cs = cfg.cs_override > 0 ? cfg.cs_override : 2 * rm - 2;
    cs = std::clamp(cs, 1, n);
    // Start the target rank at the recoverability bound, not at cs: asking the
    // sampled SVD for cs components retains sample noise as spurious
    // directions, which both pollutes the iterate and trips the expansion
    // check, ratcheting the rank up for good. The adaptive rule lowers the
    // rank from here as the shrink reveals how many components matter.
    ctrl.current_ks = std::clamp(rm, 1, cs);
    ctrl.epsilon_ks = cfg.eps_ks;
  }
  std::uint64_t svd_draws = 0;

  for (std::size_t stage = 0; stage < rep.mu_path.size(); ++stage) {
    const double mu = rep.mu_path[stage];
    int steps_taken = 0;
    bool have_prev_y = false;
    DenseMatrix Y_prev;
    bool debias_done = false;
    double prev_obj = 0.0;
    bool have_prev_obj = false;
    int guard_streak = 0;

    for (int it = 1; it <= cfg.inner_max; ++it) {
      int ks_used = 0;
      SvdBackend backend;
      if (!exact) {
        ks_used = ctrl.retarget(fx.sigma, cs);
        ApproxSvdConfig acfg;
        acfg.cs = cs;
        acfg.ks = ks_used;
        acfg.seed = derive_seed(cfg.svd_seed, 1, svd_draws++);
        backend = [acfg](const DenseMatrix& A) { return linear_time_svd(A, acfg); };
      }

      ProxStepResult st = prox_step(X, map, b, cfg.tau, mu, backend);
      ++rep.svd_calls;
      steps_taken = it;

      const double obj = mu * nuc_X + 0.5 * st.residual_sq;
      if (guard_active) {
        if (have_prev_obj &&
            obj > prev_obj + 1e-9 * std::max(1.0, std::abs(prev_obj))) {
          if (++guard_streak > 50) {
            throw SolverFault(
                "objective increased over more than 50 consecutive steps; "
                "aborting as a numerical fault");
          }
        } else {
          guard_streak = 0;
        }
        prev_obj = obj;
        have_prev_obj = true;
      }

      if (!exact) {
        if (have_prev_y) {
          const double num = frobenius_distance(st.X_next, X);
          const double den = frobenius_distance(st.Y, Y_prev);
          ctrl.record_step(num > den * (1.0 + 1e-10));
        }
        Y_prev = st.Y;
        have_prev_y = true;
        rep.ks_history.push_back(ks_used);
      }

      double step_norm = frobenius_distance(st.X_next, X);
      const double x_denom = std::max(1.0, frobenius_norm(X));

      if (cfg.debias && !debias_done && st.factors.rank() > 0 && step_norm > 0.0) {
        const double gnorm = spectral_norm(st.grad);
        if (gnorm / step_norm > cfg.debias_trigger) {
          const std::vector<double> refit = debias(st.factors, map, b);
          apply_refit(refit, st.factors, st.X_next);
          step_norm = frobenius_distance(st.X_next, X);
          debias_done = true;
          have_prev_y = false;  // X_next is no longer a pure shrink output
        }
      }

      if (cfg.on_iterate) {
        SolverConfig::IterateInfo info;
        info.stage = static_cast<int>(stage);
        info.mu = mu;
        info.iteration = it;
        info.objective = obj;
        info.step_norm = step_norm;
        info.residual_sq = st.residual_sq;
        info.rank = st.factors.rank();
        info.ks = ks_used;
        cfg.on_iterate(info);
      }

      bool stop = step_norm / x_denom < cfg.xtol;
      if (stop && gtol_active) {
        const DenseMatrix g_next = map.gradient(st.X_next, b);
        stop = stopping_g(st.factors, g_next, mu, cfg.gtol);
      }

      X = std::move(st.X_next);
      fx = std::move(st.factors);
      nuc_X = sigma_sum(fx);
      if (stop) break;
    }
    rep.inner_iterations.push_back(steps_taken);

    if (exact) {
      const ProxStepResult chk = prox_step(X, map, b, cfg.tau, mu, {});
      ++rep.svd_calls;
      rep.stage_fp_residual.push_back(frobenius_distance(chk.X_next, X) /
                                      std::max(1.0, frobenius_norm(X)));
    }
  }

  rep.final_rank = fx.rank();
  rep.X_opt = std::move(X);
  {
    std::vector<double> ax(static_cast<std::size_t>(map.sample_count()));
    map.apply_into(rep.X_opt, ax.data());
    double rss = 0.0;
    for (std::size_t t = 0; t < ax.size(); ++t) {
      rss += (ax[t] - b[t]) * (ax[t] - b[t]);
    }
    rep.residual_norm = std::sqrt(rss);
  }
  rep.elapsed_seconds = seconds_since(t0);
  return rep;
}

}  // namespace

ProxStepResult prox_step(const DenseMatrix& X, const MeasurementMap& map,
                         const std::vector<double>& b, double tau, double mu,
                         const SvdBackend& svd) {
  if (!(tau > 0.0) || !(mu > 0.0)) {
    throw std::invalid_argument("prox_step: tau and mu must be positive");
  }
  ProxStepResult r;
  std::vector<double> scratch;
  r.residual_sq = map.gradient_into(X, b, r.grad, scratch);
  r.Y = DenseMatrix(X.rows(), X.cols());
  kernels::sub_scaled(X.data(), tau, r.grad.data(), r.Y.data(), X.size());
  const SvdFactors fy = svd ? svd(r.Y) : full_svd(r.Y);
  ShrinkResult s = shrink_factors(fy, X.rows(), X.cols(), tau * mu);
  r.X_next = std::move(s.X);
  r.factors = std::move(s.factors);
  return r;
}

bool stopping_x(const DenseMatrix& X_prev, const DenseMatrix& X_next, double xtol) {
  if (!X_prev.same_shape(X_next)) {
    throw std::invalid_argument("stopping_x: shapes differ");
  }
  return frobenius_distance(X_next, X_prev) /
             std::max(1.0, frobenius_norm(X_prev)) <
         xtol;
}

bool stopping_g(const SvdFactors& factors, const DenseMatrix& g, double mu,
                double gtol) {
  if (!(mu > 0.0)) throw std::invalid_argument("stopping_g: mu must be positive");
  DenseMatrix T = factors.rank() > 0 ? matmul_nt(factors.U, factors.V)
                                     : DenseMatrix(g.rows(), g.cols());
  kernels::axpy(1.0 / mu, g.data(), T.data(), T.size());
  return spectral_norm(T, 1e-8) - 1.0 < gtol;
}

std::vector<double> debias(const SvdFactors& factors, const MeasurementMap& map,
                           const std::vector<double>& b) {
  const int r = factors.rank();
  if (r == 0) return {};
  if (static_cast<int>(b.size()) != map.sample_count()) {
    throw std::invalid_argument("debias: measurement vector has the wrong length");
  }
  const int p = map.sample_count();

  // B column i = A(u_i v_i^T); the refit solves min_{sigma>=0} ||B sigma - b||.
  DenseMatrix B(p, r);
  if (map.is_entry_mask()) {
    const std::vector<Entry>& omega = map.entries();
    for (int t = 0; t < p; ++t) {
      const Entry e = omega[static_cast<std::size_t>(t)];
      for (int i = 0; i < r; ++i) {
        B(t, i) = factors.U(e.row, i) * factors.V(e.col, i);
      }
    }
  } else {
    DenseMatrix rank1(map.rows(), map.cols());
    std::vector<double> col(static_cast<std::size_t>(p));
    for (int i = 0; i < r; ++i) {
      for (int a = 0; a < map.rows(); ++a) {
        for (int c = 0; c < map.cols(); ++c) {
          rank1(a, c) = factors.U(a, i) * factors.V(c, i);
        }
      }
      map.apply_into(rank1, col.data());
      for (int t = 0; t < p; ++t) B(t, i) = col[static_cast<std::size_t>(t)];
    }
  }

  const DenseMatrix G = matmul_tn(B, B);
  std::vector<double> c(static_cast<std::size_t>(r));
  matvec_t(B, b.data(), c.data());

  const double lmax = spectral_norm(G);
  std::vector<double> sigma = factors.sigma;  // warm start at the current values
  if (lmax == 0.0) {
    std::fill(sigma.begin(), sigma.end(), 0.0);
    return sigma;
  }
  const double step = 1.0 / (1.01 * lmax);

  std::vector<double> grad(static_cast<std::size_t>(r));
  std::vector<double> next(static_cast<std::size_t>(r));
  for (int it = 0; it < 500; ++it) {
    matvec(G, sigma.data(), grad.data());
    for (int i = 0; i < r; ++i) grad[static_cast<std::size_t>(i)] -= c[static_cast<std::size_t>(i)];
    for (int i = 0; i < r; ++i) {
      next[static_cast<std::size_t>(i)] = std::max(
          0.0, sigma[static_cast<std::size_t>(i)] - step * grad[static_cast<std::size_t>(i)]);
    }
    const double change =
        std::sqrt(kernels::sumsq_diff(next.data(), sigma.data(), next.size()));
    const double scale =
        std::max(1.0, std::sqrt(kernels::sumsq(sigma.data(), sigma.size())));
    sigma.swap(next);
    if (change <= 1e-10 * scale) break;
  }
  return sigma;
}

SolveReport fpc_solve(const MeasurementMap& map, const std::vector<double>& b,
                      const SolverConfig& cfg) {
  return solve_impl(map, b, cfg, nullptr);
}

SolveReport fpc_solve(const MeasurementMap& map, const std::vector<double>& b,
                      const SolverConfig& cfg, const DenseMatrix& X0) {
  return solve_impl(map, b, cfg, &X0);
}

SolveReport bregman_solve(const MeasurementMap& map, const std::vector<double>& b,
                          const SolverConfig& cfg) {
  if (cfg.bregman_outer < 1) {
    throw std::invalid_argument("bregman_solve: need at least one outer iteration");
  }
  const auto t0 = Clock::now();
  const std::size_t p = b.size();

  std::vector<double> bk = b;
  std::vector<double> ax(p);
  DenseMatrix X(map.rows(), map.cols());
  SolveReport rep;
  long svd_total = 0;

  for (int k = 0; k < cfg.bregman_outer; ++k) {
    if (k > 0) {
      map.apply_into(X, ax.data());
      for (std::size_t t = 0; t < p; ++t) bk[t] = b[t] + (bk[t] - ax[t]);
    }
    SolveReport inner = fpc_solve(map, bk, cfg, X);
    svd_total += inner.svd_calls;
    X = inner.X_opt;
    const std::vector<double> outer = std::move(rep.outer_residuals);
    rep = std::move(inner);
    rep.outer_residuals = outer;

    map.apply_into(X, ax.data());
    double rss = 0.0;
    for (std::size_t t = 0; t < p; ++t) rss += (ax[t] - b[t]) * (ax[t] - b[t]);
    rep.outer_residuals.push_back(std::sqrt(rss));
  }

  rep.svd_calls = svd_total;
  rep.residual_norm = rep.outer_residuals.back();
  rep.elapsed_seconds = seconds_since(t0);
  return rep;
}

SolverConfig profile_config(const std::string& name) {
  SolverConfig cfg;
  if (name == "fpc1") return cfg;
  if (name == "fpc2") {
    cfg.use_gtol_rule = true;
    return cfg;
  }
  if (name == "fpc3") {
    cfg.debias = true;
    return cfg;
  }
  if (name == "fpca") {
    cfg.svd_mode = SvdMode::Approximate;
    cfg.xtol = 1e-6;
    return cfg;
  }
  if (name == "fpca-easy") {
    cfg.svd_mode = SvdMode::Approximate;
    cfg.mu_bar = 1e-4;
    cfg.xtol = 1e-4;
    cfg.tau = 2.0;
    cfg.inner_max = 10;
    cfg.allow_tau_at_bound = true;
    return cfg;
  }
  if (name == "bregman") {
    cfg.use_gtol_rule = true;
    cfg.bregman_outer = 3;
    return cfg;
  }
  throw std::invalid_argument("unknown solver profile: " + name);
}

SolveReport solve_with_profile(const std::string& profile,
                               const MeasurementMap& map,
                               const std::vector<double>& b,
                               const SolverConfig& cfg) {
  profile_config(profile);  // reject unknown names
  return profile == "bregman" ? bregman_solve(map, b, cfg)
                              : fpc_solve(map, b, cfg);
}

}  // namespace fpc
