#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>

#include "fpc/linalg.hpp"
#include "fpc/problems.hpp"

using fpc::BenchmarkRow;
using fpc::DenseMatrix;
using fpc::GridCell;
using fpc::ProblemInstance;

TEST_CASE("generated instances satisfy their invariants") {
  SUBCASE("observations agree with the ground truth exactly") {
    const ProblemInstance inst = fpc::gen_instance(10, 8, 3, 40, 123);
    REQUIRE(inst.omega.size() == 40);
    REQUIRE(inst.b.size() == 40);
    std::set<std::pair<int, int>> seen;
    for (std::size_t t = 0; t < inst.omega.size(); ++t) {
      const fpc::Entry e = inst.omega[t];
      CHECK(inst.b[t] == inst.M(e.row, e.col));
      CHECK(seen.insert({e.row, e.col}).second);  // no duplicates
    }
    // sorted row-major
    CHECK(std::is_sorted(seen.begin(), seen.end()));
  }

  SUBCASE("the generated matrix has the requested rank") {
    const ProblemInstance inst = fpc::gen_instance(10, 8, 3, 40, 123);
    const fpc::SvdFactors f = fpc::full_svd(inst.M);
    int rank = 0;
    for (double s : f.sigma) {
      if (s > 1e-9 * f.sigma.front()) ++rank;
    }
    CHECK(rank == 3);
  }

  SUBCASE("full sampling covers every entry in row-major order") {
    const ProblemInstance inst = fpc::gen_instance(3, 4, 2, 12, 7);
    REQUIRE(inst.omega.size() == 12);
    std::size_t t = 0;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 4; ++j, ++t) {
        CHECK(inst.omega[t].row == i);
        CHECK(inst.omega[t].col == j);
        CHECK(inst.b[t] == inst.M(i, j));
      }
    }
  }

  SUBCASE("full-rank request produces a full-rank matrix") {
    const ProblemInstance inst = fpc::gen_instance(5, 7, 5, 20, 99);
    CHECK(fpc::full_svd(inst.M).rank() == 5);
  }

  SUBCASE("same seed reproduces the instance bitwise") {
    const ProblemInstance a = fpc::gen_instance(9, 9, 2, 30, 5551);
    const ProblemInstance b = fpc::gen_instance(9, 9, 2, 30, 5551);
    CHECK(std::memcmp(a.M.data(), b.M.data(), a.M.size() * sizeof(double)) == 0);
    CHECK(a.omega == b.omega);
    CHECK(a.b == b.b);
    const ProblemInstance c = fpc::gen_instance(9, 9, 2, 30, 5552);
    CHECK(std::memcmp(a.M.data(), c.M.data(), a.M.size() * sizeof(double)) != 0);
  }

  SUBCASE("invalid shapes are rejected") {
    CHECK_THROWS_AS(fpc::gen_instance(4, 4, 5, 10, 0), std::invalid_argument);
    CHECK_THROWS_AS(fpc::gen_instance(4, 4, 0, 10, 0), std::invalid_argument);
    CHECK_THROWS_AS(fpc::gen_instance(4, 4, 2, 17, 0), std::invalid_argument);
    CHECK_THROWS_AS(fpc::gen_instance(4, 4, 2, 0, 0), std::invalid_argument);
  }
}

TEST_CASE("relative error metric") {
  const ProblemInstance inst = fpc::gen_instance(6, 6, 2, 36, 42);
  const DenseMatrix& M = inst.M;

  CHECK(fpc::rel_error(M, M) == 0.0);
  CHECK(fpc::rel_error(DenseMatrix(6, 6), M) == doctest::Approx(1.0).epsilon(1e-15));

  DenseMatrix scaled = M;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) scaled(i, j) *= 1.001;
  }
  CHECK(fpc::rel_error(scaled, M) == doctest::Approx(1e-3).epsilon(1e-9));

  CHECK_THROWS_AS(fpc::rel_error(M, DenseMatrix(6, 6)), std::invalid_argument);
  CHECK_THROWS_AS(fpc::rel_error(DenseMatrix(5, 6), M), std::invalid_argument);
}

TEST_CASE("sampling and freedom ratios") {
  SUBCASE("reference values") {
    const fpc::FreedomStats a = fpc::freedom_stats(40, 40, 800, 3);
    CHECK(a.sr == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(a.fr == doctest::Approx(3.0 * 77.0 / 800.0).epsilon(1e-15));
    CHECK(a.r_m == 11);

    const fpc::FreedomStats b = fpc::freedom_stats(100, 100, 2000, 1);
    CHECK(b.sr == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(b.fr == doctest::Approx(0.0995).epsilon(1e-12));
  }

  SUBCASE("rank bound is the largest rank whose freedom ratio stays at most one") {
    for (int m : {5, 13, 40}) {
      for (int n : {5, 16, 40}) {
        for (int p : {(m * n) / 4, (m * n) / 2, m * n}) {
          if (p < 1) continue;
          const int r_m = fpc::freedom_stats(m, n, p, 1).r_m;
          for (int r = 1; r <= std::min(m, n); ++r) {
            const double fr = fpc::freedom_stats(m, n, p, r).fr;
            CAPTURE(m);
            CAPTURE(n);
            CAPTURE(p);
            CAPTURE(r);
            CHECK((fr <= 1.0) == (r <= r_m));
          }
        }
      }
    }
  }

  SUBCASE("preconditions") {
    CHECK_THROWS_AS(fpc::freedom_stats(4, 4, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(fpc::freedom_stats(0, 4, 1, 1), std::invalid_argument);
  }
}

TEST_CASE("normalized mean absolute error") {
  using Pairs = std::vector<std::pair<double, double>>;

  SUBCASE("perfect prediction scores zero") {
    const Pairs truth = {{1.0, -2.0}, {3.5, 0.0}};
    CHECK(fpc::nmae(truth, truth, -10.0, 10.0) == 0.0);
  }

  SUBCASE("constant absolute error of two over range twenty gives 0.1") {
    const Pairs pred = {{2.0, -2.0}, {5.0, 1.0}};
    const Pairs held = {{0.0, 0.0}, {3.0, -1.0}};
    CHECK(fpc::nmae(pred, held, -10.0, 10.0) == doctest::Approx(0.1).epsilon(1e-15));
  }

  SUBCASE("single-user worked example") {
    const Pairs pred = {{5.0, -4.0}};
    const Pairs held = {{3.0, -4.0}};
    CHECK(fpc::nmae(pred, held, -10.0, 10.0) == doctest::Approx(0.05).epsilon(1e-15));
  }

  SUBCASE("preconditions") {
    const Pairs one = {{1.0, 2.0}};
    CHECK_THROWS_AS(fpc::nmae(one, {}, -10.0, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(fpc::nmae({}, {}, -10.0, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(fpc::nmae(one, one, 10.0, 10.0), std::invalid_argument);
  }
}

TEST_CASE("benchmark harness") {
  SUBCASE("single fully observed trial recovers with equal error statistics") {
    const std::vector<GridCell> grid = {{6, 6, 2, 36}};
    const std::vector<BenchmarkRow> rows = fpc::run_benchmark(grid, 1, "fpc1", 77);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].r == 2);
    CHECK(rows[0].fr == doctest::Approx(2.0 * 10.0 / 36.0).epsilon(1e-15));
    CHECK(rows[0].ns == 1);
    CHECK(rows[0].ra == rows[0].ru);
    CHECK(rows[0].ra == rows[0].rl);
    CHECK(rows[0].ra < 1e-3);
    CHECK(rows[0].at >= 0.0);
  }

  SUBCASE("same base seed reproduces every non-timing field") {
    const std::vector<GridCell> grid = {{8, 8, 1, 48}, {8, 8, 2, 48}};
    std::vector<BenchmarkRow> a = fpc::run_benchmark(grid, 3, "fpc1", 2026);
    std::vector<BenchmarkRow> b = fpc::run_benchmark(grid, 3, "fpc1", 2026);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].r == b[i].r);
      CHECK(a[i].fr == b[i].fr);
      CHECK(a[i].ns == b[i].ns);
      CHECK(a[i].ra == b[i].ra);
      CHECK(a[i].ru == b[i].ru);
      CHECK(a[i].rl == b[i].rl);
      CHECK(a[i].rl <= a[i].ra);
      CHECK(a[i].ra <= a[i].ru);
      CHECK(a[i].ns <= 3);
    }
  }

  SUBCASE("worker-pool runs match the serial fold") {
    const std::vector<GridCell> grid = {{8, 8, 1, 48}};
    const std::vector<BenchmarkRow> serial =
        fpc::run_benchmark(grid, 4, "fpc1", 11, 1);
    const std::vector<BenchmarkRow> pooled =
        fpc::run_benchmark(grid, 4, "fpc1", 11, 3);
    REQUIRE(serial.size() == pooled.size());
    CHECK(serial[0].ns == pooled[0].ns);
    CHECK(serial[0].ra == pooled[0].ra);
    CHECK(serial[0].ru == pooled[0].ru);
    CHECK(serial[0].rl == pooled[0].rl);
  }

  SUBCASE("misses are logged") {
    // far too few samples for the rank: expect failures and log lines
    const std::vector<GridCell> grid = {{8, 8, 4, 20}};
    std::vector<std::string> log;
    const std::vector<BenchmarkRow> rows =
        fpc::run_benchmark(grid, 2, "fpc1", 5, 1, &log);
    CHECK(rows[0].ns == 0);
    CHECK(rows[0].ra == 0.0);
    CHECK(log.size() == 2);
    for (const std::string& line : log) {
      CHECK(line.find("not recovered") != std::string::npos);
    }
  }

  SUBCASE("invalid arguments are rejected") {
    const std::vector<GridCell> grid = {{6, 6, 1, 30}};
    CHECK_THROWS_AS(fpc::run_benchmark(grid, 0, "fpc1", 1), std::invalid_argument);
    CHECK_THROWS_AS(fpc::run_benchmark(grid, 1, "nope", 1), std::invalid_argument);
  }
}

TEST_CASE("benchmark table CSV round-trips exactly") {
  const std::vector<GridCell> grid = {{8, 8, 1, 48}, {8, 8, 2, 48}};
  const std::vector<BenchmarkRow> rows = fpc::run_benchmark(grid, 2, "fpc1", 31);
  const std::string csv = fpc::benchmark_csv(rows);
  CHECK(csv.rfind("r,FR,NS,AT,RA,RU,RL\n", 0) == 0);

  const std::vector<BenchmarkRow> back = fpc::parse_benchmark_csv(csv);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].r == rows[i].r);
    CHECK(back[i].fr == rows[i].fr);
    CHECK(back[i].ns == rows[i].ns);
    CHECK(back[i].at == rows[i].at);
    CHECK(back[i].ra == rows[i].ra);
    CHECK(back[i].ru == rows[i].ru);
    CHECK(back[i].rl == rows[i].rl);
  }

  CHECK_THROWS_AS(fpc::parse_benchmark_csv("bogus\n1,2,3\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      fpc::parse_benchmark_csv("r,FR,NS,AT,RA,RU,RL\n1,0.5,2\n"),
      std::invalid_argument);
}
