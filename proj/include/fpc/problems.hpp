#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fpc/dense_matrix.hpp"
#include "fpc/operators.hpp"

namespace fpc {

/// A random matrix-completion instance: a rank-r ground truth, the observed
/// index set, and the observed values.
struct ProblemInstance {
  DenseMatrix M;
  std::vector<Entry> omega;  // sorted row-major, no duplicates
  std::vector<double> b;     // b[t] = M(omega[t])
  int r = 0;
  std::uint64_t seed = 0;
};

/// Draws M = L*R^T with i.i.d. standard-normal factors and p observed entries
/// sampled uniformly without replacement. Deterministic per seed. Verifies
/// that the generated matrix really has rank r.
ProblemInstance gen_instance(int m, int n, int r, int p, std::uint64_t seed);

/// ||X - M||_F / ||M||_F. Rejects M = 0 and shape mismatches.
double rel_error(const DenseMatrix& X, const DenseMatrix& M);

struct FreedomStats {
  double sr = 0.0;  // sampling ratio p/(mn)
  double fr = 0.0;  // degrees of freedom ratio r(m+n-r)/p
  int r_m = 0;      // largest rank with r(m+n-r) <= p
};
FreedomStats freedom_stats(int m, int n, int p, int r);

/// Mean absolute error over two withheld ratings per user, normalized by the
/// rating range: sum(|d1| + |d2|)/(2N) / (r_max - r_min).
double nmae(const std::vector<std::pair<double, double>>& predicted,
            const std::vector<std::pair<double, double>>& withheld,
            double r_min, double r_max);

struct GridCell {
  int m = 0;
  int n = 0;
  int r = 0;
  int p = 0;
};

/// One benchmark table row: recovery count and error statistics over the
/// recovered trials of a grid cell.
struct BenchmarkRow {
  int r = 0;
  double fr = 0.0;
  int ns = 0;       // trials with rel_error < 1e-3
  double at = 0.0;  // mean solve seconds over recovered trials
  double ra = 0.0;  // mean rel_error over recovered trials
  double ru = 0.0;  // max rel_error over recovered trials
  double rl = 0.0;  // min rel_error over recovered trials
};

/// Runs `trials` seeded instances per grid cell through the named solver
/// profile. Instance seeds follow derive_seed(base_seed, cell, trial), so
/// results are reproducible and independent of `jobs`. Solver aborts count
/// as unrecovered; `log`, when given, receives one line per abort, per miss,
/// and per trial that exhausted an inner iteration budget.
std::vector<BenchmarkRow> run_benchmark(const std::vector<GridCell>& grid,
                                        int trials, const std::string& profile,
                                        std::uint64_t base_seed, int jobs = 1,
                                        std::vector<std::string>* log = nullptr);

/// CSV with header r,FR,NS,AT,RA,RU,RL; 17 significant digits, so parsing
/// back reproduces every field exactly.
std::string benchmark_csv(const std::vector<BenchmarkRow>& rows);
std::vector<BenchmarkRow> parse_benchmark_csv(const std::string& text);

}  // namespace fpc
