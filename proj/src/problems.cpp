#include "fpc/problems.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fpc/linalg.hpp"
#include "fpc/rng.hpp"
#include "fpc/solvers.hpp"

namespace fpc {

namespace {

constexpr double kRecoveryThreshold = 1e-3;
constexpr double kRankTol = 1e-9;

struct TrialOutcome {
  bool recovered = false;
  double rel = 0.0;
  double seconds = 0.0;
  std::string note;  // empty when the trial recovered cleanly
};

TrialOutcome run_trial(const GridCell& cell, const std::string& profile,
                       std::uint64_t seed) {
  TrialOutcome out;
  const ProblemInstance inst = gen_instance(cell.m, cell.n, cell.r, cell.p, seed);
  const MeasurementMap map =
      MeasurementMap::entry_mask(cell.m, cell.n, inst.omega);
  SolverConfig cfg = profile_config(profile);
  cfg.svd_seed = seed;
  try {
    const SolveReport rep = solve_with_profile(profile, map, inst.b, cfg);
    out.rel = rel_error(rep.X_opt, inst.M);
    out.seconds = rep.elapsed_seconds;
    out.recovered = out.rel < kRecoveryThreshold;
    const bool capped =
        std::find(rep.inner_iterations.begin(), rep.inner_iterations.end(),
                  cfg.inner_max) != rep.inner_iterations.end();
    if (!out.recovered) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.3e", out.rel);
      out.note = "not recovered (rel.err " + std::string(buf) + ")";
    } else if (capped) {
      out.note = "recovered but hit the inner iteration cap in some stage";
    }
  } catch (const SolverFault& fault) {
    out.note = std::string("solver abort: ") + fault.what();
  }
  return out;
}

}  // namespace

ProblemInstance gen_instance(int m, int n, int r, int p, std::uint64_t seed) {
  if (m < 1 || n < 1) throw std::invalid_argument("gen_instance: empty shape");
  if (r < 1 || r > std::min(m, n)) {
    throw std::invalid_argument("gen_instance: rank out of range");
  }
  const long long total = static_cast<long long>(m) * n;
  if (p < 1 || static_cast<long long>(p) > total) {
    throw std::invalid_argument("gen_instance: sample count out of range");
  }

  Rng rng(seed);
  DenseMatrix L(m, r), R(n, r);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < r; ++j) L(i, j) = rng.normal();
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < r; ++j) R(i, j) = rng.normal();
  }

  ProblemInstance inst;
  inst.M = matmul_nt(L, R);
  inst.r = r;
  inst.seed = seed;

  // p distinct flat indices, uniform without replacement
  std::vector<int> idx(static_cast<std::size_t>(total));
  std::iota(idx.begin(), idx.end(), 0);
  for (int t = 0; t < p; ++t) {
    const std::size_t pick =
        static_cast<std::size_t>(t) +
        static_cast<std::size_t>(rng.uniform_below(
            static_cast<std::uint64_t>(idx.size()) - static_cast<std::uint64_t>(t)));
    std::swap(idx[static_cast<std::size_t>(t)], idx[pick]);
  }
  idx.resize(static_cast<std::size_t>(p));
  std::sort(idx.begin(), idx.end());

  inst.omega.reserve(static_cast<std::size_t>(p));
  inst.b.reserve(static_cast<std::size_t>(p));
  for (int flat : idx) {
    const int i = flat / n;
    const int j = flat % n;
    inst.omega.push_back({i, j});
    inst.b.push_back(inst.M(i, j));
  }

  const SvdFactors f = full_svd(inst.M);
  int rank = 0;
  if (!f.sigma.empty()) {
    for (double s : f.sigma) {
      if (s > kRankTol * f.sigma.front()) ++rank;
    }
  }
  if (rank != r) {
    throw std::runtime_error("gen_instance: generated matrix misses the target rank");
  }
  return inst;
}

double rel_error(const DenseMatrix& X, const DenseMatrix& M) {
  if (!X.same_shape(M)) throw std::invalid_argument("rel_error: shapes differ");
  const double denom = frobenius_norm(M);
  if (denom == 0.0) throw std::invalid_argument("rel_error: reference matrix is zero");
  return frobenius_distance(X, M) / denom;
}

FreedomStats freedom_stats(int m, int n, int p, int r) {
  if (m < 1 || n < 1) throw std::invalid_argument("freedom_stats: empty shape");
  if (p < 1) throw std::invalid_argument("freedom_stats: need at least one sample");
  if (r < 0) throw std::invalid_argument("freedom_stats: negative rank");
  FreedomStats st;
  st.sr = static_cast<double>(p) / (static_cast<double>(m) * static_cast<double>(n));
  st.fr = static_cast<double>(r) * (static_cast<double>(m) + n - r) / p;
  const double s = static_cast<double>(m) + static_cast<double>(n);
  const double disc = std::max(0.0, s * s - 4.0 * static_cast<double>(p));
  st.r_m = static_cast<int>(std::floor((s - std::sqrt(disc)) / 2.0));
  return st;
}

double nmae(const std::vector<std::pair<double, double>>& predicted,
            const std::vector<std::pair<double, double>>& withheld,
            double r_min, double r_max) {
  if (predicted.size() != withheld.size()) {
    throw std::invalid_argument("nmae: prediction/withheld lengths differ");
  }
  if (predicted.empty()) throw std::invalid_argument("nmae: no users");
  if (!(r_max > r_min)) throw std::invalid_argument("nmae: empty rating range");
  double sum = 0.0;
  for (std::size_t u = 0; u < predicted.size(); ++u) {
    sum += std::abs(predicted[u].first - withheld[u].first) +
           std::abs(predicted[u].second - withheld[u].second);
  }
  const double mae = sum / (2.0 * static_cast<double>(predicted.size()));
  return mae / (r_max - r_min);
}

std::vector<BenchmarkRow> run_benchmark(const std::vector<GridCell>& grid,
                                        int trials, const std::string& profile,
                                        std::uint64_t base_seed, int jobs,
                                        std::vector<std::string>* log) {
  if (trials < 1) throw std::invalid_argument("run_benchmark: need at least one trial");
  profile_config(profile);  // reject unknown profiles up front
  jobs = std::max(1, jobs);

  std::vector<BenchmarkRow> rows;
  rows.reserve(grid.size());

  for (std::size_t cell_index = 0; cell_index < grid.size(); ++cell_index) {
    const GridCell& cell = grid[cell_index];
    std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(trials));

    if (jobs == 1) {
      for (int t = 0; t < trials; ++t) {
        outcomes[static_cast<std::size_t>(t)] = run_trial(
            cell, profile, derive_seed(base_seed, cell_index,
                                       static_cast<std::uint64_t>(t)));
      }
    } else {
      std::atomic<int> next{0};
      std::vector<std::thread> pool;
      const int workers = std::min(jobs, trials);
      pool.reserve(static_cast<std::size_t>(workers));
      for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
          for (int t = next.fetch_add(1); t < trials; t = next.fetch_add(1)) {
            outcomes[static_cast<std::size_t>(t)] = run_trial(
                cell, profile, derive_seed(base_seed, cell_index,
                                           static_cast<std::uint64_t>(t)));
          }
        });
      }
      for (std::thread& th : pool) th.join();
    }

    // deterministic fold in trial order
    BenchmarkRow row;
    row.r = cell.r;
    row.fr = freedom_stats(cell.m, cell.n, cell.p, cell.r).fr;
    double sum_t = 0.0, sum_rel = 0.0;
    for (int t = 0; t < trials; ++t) {
      const TrialOutcome& out = outcomes[static_cast<std::size_t>(t)];
      if (out.recovered) {
        ++row.ns;
        sum_t += out.seconds;
        sum_rel += out.rel;
        row.ru = row.ns == 1 ? out.rel : std::max(row.ru, out.rel);
        row.rl = row.ns == 1 ? out.rel : std::min(row.rl, out.rel);
      }
      if (log != nullptr && !out.note.empty()) {
        log->push_back("cell " + std::to_string(cell_index) + " trial " +
                       std::to_string(t) + ": " + out.note);
      }
    }
    if (row.ns > 0) {
      row.at = sum_t / row.ns;
      row.ra = sum_rel / row.ns;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows) {
  std::string out = "r,FR,NS,AT,RA,RU,RL\n";
  char buf[256];
  for (const BenchmarkRow& row : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%d,%.17g,%.17g,%.17g,%.17g\n",
                  row.r, row.fr, row.ns, row.at, row.ra, row.ru, row.rl);
    out += buf;
  }
  return out;
}

std::vector<BenchmarkRow> parse_benchmark_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "r,FR,NS,AT,RA,RU,RL") {
    throw std::invalid_argument("benchmark csv: missing or wrong header");
  }
  std::vector<BenchmarkRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    BenchmarkRow row;
    const int got =
        std::sscanf(line.c_str(), "%d,%lg,%d,%lg,%lg,%lg,%lg", &row.r, &row.fr,
                    &row.ns, &row.at, &row.ra, &row.ru, &row.rl);
    if (got != 7) {
      throw std::invalid_argument("benchmark csv: malformed line " +
                                  std::to_string(lineno));
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace fpc
