#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "fpc/approx_svd.hpp"
#include "fpc/dense_matrix.hpp"
#include "fpc/linalg.hpp"
#include "fpc/rng.hpp"

using fpc::ApproxSvdConfig;
using fpc::DenseMatrix;
using fpc::RankController;
using fpc::SvdFactors;

namespace {

DenseMatrix random_matrix(fpc::Rng& rng, int m, int n) {
  DenseMatrix A(m, n);
  for (std::size_t i = 0; i < A.size(); ++i) A.data()[i] = rng.normal();
  return A;
}

DenseMatrix random_low_rank(fpc::Rng& rng, int m, int n, int r) {
  const DenseMatrix L = random_matrix(rng, m, r);
  const DenseMatrix R = random_matrix(rng, n, r);
  return matmul_nt(L, R);
}

double rel_fro_error(const DenseMatrix& A, const DenseMatrix& B) {
  return fpc::frobenius_distance(A, B) / fpc::frobenius_norm(A);
}

double orthonormality_defect(const DenseMatrix& Q) {
  const DenseMatrix G = matmul_tn(Q, Q);
  double d = 0.0;
  for (int i = 0; i < G.rows(); ++i) {
    for (int j = 0; j < G.cols(); ++j) {
      d = std::max(d, std::abs(G(i, j) - (i == j ? 1.0 : 0.0)));
    }
  }
  return d;
}

}  // namespace

TEST_CASE("all-ones matrix reduces to its rank-one factorization") {
  const DenseMatrix A(2, 2, {1, 1, 1, 1});
  ApproxSvdConfig cfg;
  cfg.cs = 2;
  cfg.ks = 1;
  cfg.seed = 3;
  const SvdFactors f = fpc::linear_time_svd(A, cfg);
  REQUIRE(f.rank() == 1);
  CHECK(f.approximate);
  CHECK(f.sigma[0] == doctest::Approx(2.0).epsilon(1e-12));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(f.U(0, 0)) == doctest::Approx(inv_sqrt2).epsilon(1e-12));
  CHECK(f.U(0, 0) == doctest::Approx(f.U(1, 0)).epsilon(1e-12));
  CHECK(rel_fro_error(A, fpc::reconstruct(f, 2, 2)) <= 1e-12);
}

TEST_CASE("rank-one matrix with an unsampled zero column is still recovered") {
  const DenseMatrix A(2, 2, {2, 0, 2, 0});
  ApproxSvdConfig cfg;
  cfg.cs = 1;
  cfg.ks = 1;
  cfg.probabilities = {1.0, 0.0};  // always sample the nonzero column
  const SvdFactors f = fpc::linear_time_svd(A, cfg);
  REQUIRE(f.rank() == 1);
  CHECK(f.sigma[0] == doctest::Approx(std::sqrt(8.0)).epsilon(1e-12));
  // V = A^T U / sigma reproduces the zero column exactly
  CHECK(rel_fro_error(A, fpc::reconstruct(f, 2, 2)) <= 1e-12);
}

TEST_CASE("matches an independent step-by-step evaluation") {
  fpc::Rng data_rng(314159);
  const int m = 20, n = 20, r = 3;
  const DenseMatrix A = random_low_rank(data_rng, m, n, r);

  ApproxSvdConfig cfg;
  cfg.cs = 18;
  cfg.ks = 3;
  cfg.seed = 271828;
  const SvdFactors f = fpc::linear_time_svd(A, cfg);
  REQUIRE(f.rank() == 3);

  // Re-run the four steps directly: materialize the scaled sample matrix C,
  // factor it exactly, and lift. Its top left vectors and singular values
  // must agree with the Gram-matrix route up to per-column sign.
  const std::vector<int> picks = fpc::sample_columns(n, cfg);
  DenseMatrix C(m, cfg.cs);
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.cs) / n);
  for (int t = 0; t < cfg.cs; ++t) {
    for (int i = 0; i < m; ++i) {
      C(i, t) = A(i, picks[static_cast<std::size_t>(t)]) * scale;
    }
  }
  const SvdFactors fc = fpc::full_svd(C);
  REQUIRE(fc.rank() >= 3);

  for (int t = 0; t < 3; ++t) {
    CHECK(f.sigma[static_cast<std::size_t>(t)] ==
          doctest::Approx(fc.sigma[static_cast<std::size_t>(t)]).epsilon(1e-12));
    double align = 0.0;
    for (int i = 0; i < m; ++i) align += f.U(i, t) * fc.U(i, t);
    const double sign = align >= 0.0 ? 1.0 : -1.0;
    for (int i = 0; i < m; ++i) {
      CHECK(std::abs(f.U(i, t) - sign * fc.U(i, t)) <= 1e-10);
    }
    // V column = A^T u_t / sigma_t
    for (int j = 0; j < n; ++j) {
      double v = 0.0;
      for (int i = 0; i < m; ++i) v += A(i, j) * fc.U(i, t);
      v *= sign / fc.sigma[static_cast<std::size_t>(t)];
      CHECK(std::abs(f.V(j, t) - v) <= 1e-10);
    }
  }
}

TEST_CASE("deterministic for a fixed seed") {
  fpc::Rng data_rng(8);
  const DenseMatrix A = random_matrix(data_rng, 15, 12);
  ApproxSvdConfig cfg;
  cfg.cs = 10;
  cfg.ks = 5;
  cfg.seed = 99;
  const SvdFactors f1 = fpc::linear_time_svd(A, cfg);
  const SvdFactors f2 = fpc::linear_time_svd(A, cfg);
  REQUIRE(f1.rank() == f2.rank());
  CHECK(f1.sigma == f2.sigma);
  CHECK(std::memcmp(f1.U.data(), f2.U.data(), f1.U.size() * sizeof(double)) == 0);
  CHECK(std::memcmp(f1.V.data(), f2.V.data(), f1.V.size() * sizeof(double)) == 0);
}

TEST_CASE("rank truncation and degenerate inputs") {
  SUBCASE("rank-deficient sample keeps only positive components") {
    const DenseMatrix A(3, 3, {1, 1, 1, 1, 1, 1, 1, 1, 1});
    ApproxSvdConfig cfg;
    cfg.cs = 3;
    cfg.ks = 3;
    cfg.seed = 1;
    const SvdFactors f = fpc::linear_time_svd(A, cfg);
    CHECK(f.rank() == 1);
    CHECK(f.sigma[0] == doctest::Approx(3.0).epsilon(1e-10));
  }
  SUBCASE("zero matrix yields an empty factorization") {
    ApproxSvdConfig cfg;
    cfg.cs = 2;
    cfg.ks = 1;
    const SvdFactors f = fpc::linear_time_svd(DenseMatrix(3, 3), cfg);
    CHECK(f.rank() == 0);
    CHECK(f.approximate);
  }
  SUBCASE("sigma is nonincreasing") {
    fpc::Rng rng(21);
    const DenseMatrix A = random_matrix(rng, 12, 10);
    ApproxSvdConfig cfg;
    cfg.cs = 10;
    cfg.ks = 10;
    cfg.seed = 5;
    const SvdFactors f = fpc::linear_time_svd(A, cfg);
    for (int i = 0; i + 1 < f.rank(); ++i) {
      CHECK(f.sigma[static_cast<std::size_t>(i)] >=
            f.sigma[static_cast<std::size_t>(i + 1)]);
    }
    CHECK(orthonormality_defect(f.U) <= 1e-10);
  }
}

TEST_CASE("configuration validation") {
  const DenseMatrix A(3, 4);
  ApproxSvdConfig cfg;
  cfg.cs = 5;  // > n
  cfg.ks = 1;
  CHECK_THROWS_AS(fpc::linear_time_svd(A, cfg), std::invalid_argument);
  cfg.cs = 3;
  cfg.ks = 4;  // > cs
  CHECK_THROWS_AS(fpc::linear_time_svd(A, cfg), std::invalid_argument);
  cfg.ks = 2;
  cfg.probabilities = {0.5, 0.5};  // wrong length
  CHECK_THROWS_AS(fpc::linear_time_svd(A, cfg), std::invalid_argument);
  cfg.probabilities = {0.5, 0.5, 0.5, -0.5};
  CHECK_THROWS_AS(fpc::linear_time_svd(A, cfg), std::invalid_argument);
  cfg.probabilities = {0.4, 0.4, 0.4, 0.4};  // sums to 1.6
  CHECK_THROWS_AS(fpc::linear_time_svd(A, cfg), std::invalid_argument);
}

TEST_CASE("column-norm probabilities") {
  const DenseMatrix A(2, 2, {1, 0, 0, 2});
  const std::vector<double> p = fpc::column_norm_probabilities(A);
  CHECK(p[0] == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(p[1] == doctest::Approx(0.8).epsilon(1e-14));

  const std::vector<double> pz = fpc::column_norm_probabilities(DenseMatrix(2, 3));
  for (double v : pz) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-14));

  // a point mass always samples the same column
  ApproxSvdConfig cfg;
  cfg.cs = 4;
  cfg.ks = 1;
  cfg.probabilities = {0.0, 1.0, 0.0, 0.0, 0.0};
  cfg.seed = 77;
  const std::vector<int> picks = fpc::sample_columns(5, cfg);
  REQUIRE(picks.size() == 4);
  for (int pick : picks) CHECK(pick == 1);
}

TEST_CASE("adaptive_rank counts the dominant components") {
  CHECK(fpc::adaptive_rank({10.0, 5.0, 0.05}, 1e-2) == 2);
  CHECK(fpc::adaptive_rank({7.0}, 1e-2) == 1);
  CHECK(fpc::adaptive_rank({4.0, 4.0, 4.0}, 1e-2) == 3);   // ties all pass
  CHECK(fpc::adaptive_rank({5.0, 0.05, 0.049}, 1e-2) == 2);  // boundary is >=
  CHECK(fpc::adaptive_rank({0.0, 0.0}, 1e-2) == 1);
  CHECK_THROWS_AS(fpc::adaptive_rank({}, 1e-2), std::invalid_argument);
  CHECK_THROWS_AS(fpc::adaptive_rank({1.0}, 0.0), std::invalid_argument);
}

TEST_CASE("rank controller arms a probe after ten violations") {
  RankController ctrl;
  ctrl.current_ks = 4;
  for (int i = 0; i < 9; ++i) ctrl.record_step(true);
  CHECK(ctrl.violation_count == 9);
  CHECK(!ctrl.probe_armed);
  ctrl.record_step(false);  // clean steps do not reset the count
  CHECK(ctrl.violation_count == 9);
  ctrl.record_step(true);  // tenth violation
  CHECK(ctrl.probe_armed);
  CHECK(ctrl.violation_count == 0);
}

TEST_CASE("retarget follows the adaptive count and consumes probes") {
  RankController ctrl;
  ctrl.current_ks = 6;
  CHECK(ctrl.retarget({10.0, 5.0, 0.05}, 8) == 2);
  ctrl.probe_armed = true;
  CHECK(ctrl.retarget({10.0, 5.0, 0.05}, 8) == 3);  // one extra, once
  CHECK(ctrl.retarget({10.0, 5.0, 0.05}, 8) == 2);  // probe consumed
  ctrl.probe_armed = true;
  CHECK(ctrl.retarget({10.0, 5.0, 0.05}, 2) == 2);  // clamped to cs
  CHECK(ctrl.retarget({}, 8) == 2);                 // no spectrum: keep target
  CHECK(ctrl.retarget({0.0, 0.0}, 8) == 1);
}

TEST_CASE("a noise probe falls back while a confirmed component persists") {
  // The probe lifts the target by one for a single draw. Whether the lift
  // sticks is decided by the next spectrum: a surviving component raises the
  // adaptive count by itself, a discarded one leaves no trace. Ten more
  // violations are required before another lift, so a noisy stretch of steps
  // cannot ratchet the target upward.
  RankController ctrl;
  ctrl.current_ks = 3;
  for (int i = 0; i < 10; ++i) ctrl.record_step(true);
  CHECK(ctrl.retarget({9.0, 3.0, 1.0}, 10) == 4);
  // shrink kept nothing new: target falls back, and further violations only
  // count toward the next probe
  for (int i = 0; i < 5; ++i) ctrl.record_step(true);
  CHECK(ctrl.retarget({9.0, 3.0, 1.0}, 10) == 3);
  // shrink kept the probed component: the count itself carries the rank
  for (int i = 0; i < 10; ++i) ctrl.record_step(true);
  CHECK(ctrl.retarget({9.0, 3.0, 1.0}, 10) == 4);
  CHECK(ctrl.retarget({9.0, 3.0, 1.0, 0.8}, 10) == 4);
}

TEST_CASE("projection quality on exactly low-rank matrices") {
  // For rank-r A with cs = n, the lifted basis spans the column space almost
  // surely, so the approximation error collapses. Median over 50 seeds must
  // sit well under the smoke-test ceiling of 0.15.
  fpc::Rng data_rng(2718);
  const int n = 40, r = 3;
  DenseMatrix A = random_low_rank(data_rng, n, n, r);
  for (int j = 0; j < n; ++j) {  // equalize column norms
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += A(i, j) * A(i, j);
    const double inv = 1.0 / std::sqrt(s);
    for (int i = 0; i < n; ++i) A(i, j) *= inv;
  }

  std::vector<double> errs;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    ApproxSvdConfig cfg;
    cfg.cs = n;
    cfg.ks = r;
    cfg.seed = seed;
    const SvdFactors f = fpc::linear_time_svd(A, cfg);
    errs.push_back(rel_fro_error(A, fpc::reconstruct(f, n, n)));
  }
  std::sort(errs.begin(), errs.end());
  CHECK(errs[errs.size() / 2] <= 0.15);
}
