#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "fpc/io.hpp"
#include "fpc/pipelines.hpp"
#include "fpc/problems.hpp"
#include "fpc/solvers.hpp"

namespace {

using nlohmann::json;

class JsonLog {
 public:
  void open(const std::string& path) {
    out_.open(path);
    if (!out_) throw std::runtime_error(path + ": cannot create log file");
  }
  bool active() const { return out_.is_open(); }
  void line(const json& j) {
    if (out_.is_open()) out_ << j.dump() << '\n';
  }

 private:
  std::ofstream out_;
};

struct Overrides {
  std::optional<double> mu_bar, eta_mu, tau, xtol, gtol, eps_ks;
  std::optional<int> inner_max, cs, bregman_outer;
};

const std::vector<std::string> kProfiles = {"fpc1", "fpc2",    "fpc3",
                                            "fpca", "bregman", "fpca-easy"};

void add_solver_flags(CLI::App* sub, std::string& profile, Overrides& o) {
  sub->add_option("--profile", profile, "solver profile")
      ->check(CLI::IsMember(kProfiles))
      ->capture_default_str();
  sub->add_option("--mu-bar", o.mu_bar, "final regularization level");
  sub->add_option("--eta-mu", o.eta_mu, "continuation decrease factor");
  sub->add_option("--tau", o.tau, "gradient step size");
  sub->add_option("--xtol", o.xtol, "relative-change stopping tolerance");
  sub->add_option("--gtol", o.gtol, "dual-feasibility stopping tolerance");
  sub->add_option("--inner-max", o.inner_max, "iteration cap per stage");
  sub->add_option("--eps-ks", o.eps_ks, "adaptive rank cutoff (sampling SVD)");
  sub->add_option("--cs", o.cs, "sampled column count (sampling SVD)");
  sub->add_option("--bregman-outer", o.bregman_outer, "outer refinement passes");
}

fpc::SolverConfig build_config(const std::string& profile, const Overrides& o,
                               std::uint64_t svd_seed) {
  fpc::SolverConfig cfg = fpc::profile_config(profile);
  if (o.mu_bar) cfg.mu_bar = *o.mu_bar;
  if (o.eta_mu) cfg.eta_mu = *o.eta_mu;
  if (o.tau) cfg.tau = *o.tau;
  if (o.xtol) cfg.xtol = *o.xtol;
  if (o.gtol) cfg.gtol = *o.gtol;
  if (o.eps_ks) cfg.eps_ks = *o.eps_ks;
  if (o.inner_max) cfg.inner_max = *o.inner_max;
  if (o.cs) cfg.cs_override = *o.cs;
  if (o.bregman_outer) cfg.bregman_outer = *o.bregman_outer;
  cfg.svd_seed = svd_seed;
  return cfg;
}

void attach_iterate_log(fpc::SolverConfig& cfg, JsonLog& log) {
  if (!log.active()) return;
  cfg.on_iterate = [&log](const fpc::SolverConfig::IterateInfo& info) {
    log.line({{"event", "iterate"},
              {"stage", info.stage},
              {"mu", info.mu},
              {"iteration", info.iteration},
              {"objective", info.objective},
              {"step_norm", info.step_norm},
              {"residual_sq", info.residual_sq},
              {"rank", info.rank},
              {"ks", info.ks}});
  };
}

void log_report(JsonLog& log, const fpc::SolveReport& rep) {
  log.line({{"event", "done"},
            {"rank", rep.final_rank},
            {"residual_norm", rep.residual_norm},
            {"seconds", rep.elapsed_seconds},
            {"svd_calls", rep.svd_calls},
            {"stages", rep.mu_path.size()},
            {"warnings", rep.warnings}});
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void write_matrix_by_extension(const std::string& path,
                               const fpc::DenseMatrix& A) {
  if (ends_with(path, ".csv")) {
    fpc::write_csv_matrix(path, A);
  } else {
    fpc::write_coordinate_matrix(path, A);
  }
}

void print_report_summary(const fpc::SolveReport& rep) {
  std::printf("stages: %zu  svd calls: %ld  time: %.3f s\n", rep.mu_path.size(),
              rep.svd_calls, rep.elapsed_seconds);
  std::printf("solution rank: %d  data residual: %.3e\n", rep.final_rank,
              rep.residual_norm);
  for (const std::string& w : rep.warnings) {
    std::printf("warning: %s\n", w.c_str());
  }
}

std::vector<fpc::GridCell> parse_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open grid file");
  std::vector<fpc::GridCell> grid;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    bool blank = true;
    for (char c : line) {
      if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
    }
    if (blank) continue;
    fpc::GridCell cell;
    int used = 0;
    if (std::sscanf(line.c_str(), "%d %d %d %d %n", &cell.m, &cell.n, &cell.r,
                    &cell.p, &used) != 4 ||
        static_cast<std::size_t>(used) < line.find_last_not_of(" \t\r") + 1) {
      throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                               ": expected \"m n r p\"");
    }
    grid.push_back(cell);
  }
  if (grid.empty()) throw std::runtime_error(path + ": empty grid");
  return grid;
}

int run_generate(int rows, int cols, int rank, int samples, std::uint64_t seed,
                 const std::string& out, const std::string& truth_out) {
  const fpc::ProblemInstance inst =
      fpc::gen_instance(rows, cols, rank, samples, seed);
  fpc::MaskedData data;
  data.rows = rows;
  data.cols = cols;
  data.omega = inst.omega;
  data.b = inst.b;
  fpc::write_masked_data(out, data);
  if (!truth_out.empty()) write_matrix_by_extension(truth_out, inst.M);

  const fpc::FreedomStats st = fpc::freedom_stats(rows, cols, samples, rank);
  std::printf("wrote %d samples of a %dx%d rank-%d matrix to %s\n", samples,
              rows, cols, rank, out.c_str());
  std::printf("SR: %.4f  FR: %.4f  max recoverable rank: %d\n", st.sr, st.fr,
              st.r_m);
  return 0;
}

int run_solve(const std::string& data_path, const std::string& profile,
              const Overrides& o, std::uint64_t seed, const std::string& out,
              const std::string& truth_path, JsonLog& log) {
  const fpc::MaskedData data = fpc::read_masked_data(data_path);
  const fpc::MeasurementMap map =
      fpc::MeasurementMap::entry_mask(data.rows, data.cols, data.omega);
  fpc::SolverConfig cfg = build_config(profile, o, seed);
  attach_iterate_log(cfg, log);

  const fpc::SolveReport rep = fpc::solve_with_profile(profile, map, data.b, cfg);
  log_report(log, rep);
  print_report_summary(rep);
  if (!out.empty()) {
    write_matrix_by_extension(out, rep.X_opt);
    std::printf("solution written to %s\n", out.c_str());
  }
  if (!truth_path.empty()) {
    const fpc::DenseMatrix M = fpc::read_matrix_auto(truth_path);
    const double rel = fpc::rel_error(rep.X_opt, M);
    std::printf("rel.err vs truth: %.3e (%s)\n", rel,
                rel < 1e-3 ? "recovered" : "not recovered");
  }
  return 0;
}

int run_benchmark(std::vector<fpc::GridCell> grid, int trials,
                  const std::string& profile, std::uint64_t seed, int jobs,
                  const std::string& out, JsonLog& log) {
  std::vector<std::string> notes;
  const std::vector<fpc::BenchmarkRow> rows =
      fpc::run_benchmark(grid, trials, profile, seed, jobs, &notes);
  for (const std::string& n : notes) {
    log.line({{"event", "note"}, {"message", n}});
  }
  const std::string csv = fpc::benchmark_csv(rows);
  if (out.empty()) {
    std::fputs(csv.c_str(), stdout);
  } else {
    std::ofstream f(out);
    if (!f) throw std::runtime_error(out + ": cannot create file");
    f << csv;
    std::printf("benchmark table written to %s (%zu rows, %d trials each)\n",
                out.c_str(), rows.size(), trials);
  }
  if (!notes.empty()) {
    std::fprintf(stderr, "%zu trial notes", notes.size());
    if (log.active()) {
      std::fprintf(stderr, " (see log)");
    } else {
      std::fprintf(stderr, ":\n");
      for (const std::string& n : notes) std::fprintf(stderr, "  %s\n", n.c_str());
    }
    std::fprintf(stderr, "\n");
  }
  return 0;
}

int run_inpaint(const std::string& image_path, double mask_fraction,
                std::uint64_t mask_seed, const std::string& mask_file,
                const std::string& profile, const Overrides& o,
                std::uint64_t seed, const std::string& out,
                const std::string& truth_path, JsonLog& log) {
  const fpc::GrayImage img = fpc::read_pgm(image_path);
  fpc::MaskedImage masked;
  const fpc::GrayImage* truth = nullptr;
  fpc::GrayImage truth_img;
  if (!mask_file.empty()) {
    masked = fpc::image_mask_from_file(img, fpc::read_pgm(mask_file));
    if (!truth_path.empty()) {
      truth_img = fpc::read_pgm(truth_path);
      truth = &truth_img;
    }
  } else {
    masked = fpc::random_image_mask(img, mask_fraction, mask_seed);
    // with a synthetic mask the input itself is the clean reference
    truth_img = img;
    truth = &truth_img;
  }

  fpc::SolverConfig cfg = build_config(profile, o, seed);
  attach_iterate_log(cfg, log);
  const fpc::InpaintResult res = fpc::inpaint(masked, profile, cfg, truth);
  log_report(log, res.report);

  const double observed = static_cast<double>(masked.observed_count()) /
                          static_cast<double>(masked.pixels.size());
  std::printf("image: %dx%d, %.1f%% of pixels observed\n", img.width, img.height,
              100.0 * observed);
  print_report_summary(res.report);
  if (res.rel_err >= 0.0) {
    std::printf("rel.err vs reference (pre-quantization): %.3e\n", res.rel_err);
  }
  if (!out.empty()) {
    fpc::write_pgm(out, res.output);
    std::printf("completed image written to %s\n", out.c_str());
  }
  return 0;
}

int run_eval_nmae(const std::string& ratings_path, double r_min, double r_max,
                  int holdout, const std::string& profile, const Overrides& o,
                  std::uint64_t seed, JsonLog& log) {
  const fpc::RatingsData ratings = fpc::read_ratings_csv(ratings_path);
  fpc::SolverConfig cfg = build_config(profile, o, seed);
  attach_iterate_log(cfg, log);
  const fpc::NmaeReport rep =
      fpc::eval_nmae(ratings, r_min, r_max, profile, cfg, seed, holdout);
  log_report(log, rep.report);

  std::printf("ratings: %zu over %d users x %d items\n", ratings.entries.size(),
              ratings.users, ratings.items);
  for (const std::string& line : rep.log) {
    std::printf("note: %s\n", line.c_str());
    log.line({{"event", "note"}, {"message", line}});
  }
  std::printf("users evaluated: %d (%d ratings withheld per user)\n",
              rep.users_evaluated, holdout);
  print_report_summary(rep.report);
  std::printf("NMAE: %.4f\n", rep.value);
  log.line({{"event", "nmae"},
            {"value", rep.value},
            {"users_evaluated", rep.users_evaluated}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank matrix completion via nuclear-norm minimization"};
  app.require_subcommand(1);

  // shared state
  std::string profile = "fpc1";
  Overrides overrides;
  std::uint64_t seed = 0;
  std::string out, log_path;
  JsonLog log;

  // generate
  int g_rows = 40, g_cols = 40, g_rank = 1, g_samples = 800;
  std::string g_truth_out;
  CLI::App* gen = app.add_subcommand(
      "generate", "Create a random low-rank completion instance");
  gen->add_option("--rows", g_rows)->check(CLI::PositiveNumber)->capture_default_str();
  gen->add_option("--cols", g_cols)->check(CLI::PositiveNumber)->capture_default_str();
  gen->add_option("--rank", g_rank)->check(CLI::PositiveNumber)->capture_default_str();
  gen->add_option("--samples", g_samples)->check(CLI::PositiveNumber)->capture_default_str();
  gen->add_option("--seed", seed, "instance seed")->capture_default_str();
  gen->add_option("--out", out, "masked-data output path")->required();
  gen->add_option("--truth-out", g_truth_out, "also write the full matrix here");

  // solve
  std::string s_data, s_truth;
  CLI::App* solve = app.add_subcommand(
      "solve", "Complete a partially observed matrix from a masked-data file");
  solve->add_option("--data", s_data, "masked-data input path")->required();
  add_solver_flags(solve, profile, overrides);
  solve->add_option("--seed", seed, "sampling-SVD seed")->capture_default_str();
  solve->add_option("--out", out, "solution output path (.csv or coordinate)");
  solve->add_option("--truth", s_truth, "ground-truth matrix for an error report");
  solve->add_option("--log", log_path, "JSON-lines progress log path");

  // benchmark
  std::string b_grid;
  int b_trials = 10, b_jobs = 1;
  int b_rows = 40, b_cols = 40, b_rank = 1, b_samples = 800;
  CLI::App* bench = app.add_subcommand(
      "benchmark", "Recovery statistics over seeded random instances");
  bench->add_option("--grid", b_grid, "grid file: one \"m n r p\" line per cell");
  bench->add_option("--rows", b_rows)->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--cols", b_cols)->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--rank", b_rank)->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--samples", b_samples)->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--trials", b_trials)->check(CLI::PositiveNumber)->capture_default_str();
  add_solver_flags(bench, profile, overrides);
  bench->add_option("--seed", seed, "base seed")->capture_default_str();
  bench->add_option("--jobs", b_jobs, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--out", out, "CSV output path (default: stdout)");
  bench->add_option("--log", log_path, "JSON-lines note log path");

  // inpaint
  std::string i_image, i_mask_file, i_truth;
  double i_fraction = 0.5;
  std::uint64_t i_mask_seed = 0;
  CLI::App* inp = app.add_subcommand(
      "inpaint", "Complete masked pixels of a grayscale image");
  inp->add_option("--image", i_image, "input graymap (P2/P5)")->required();
  CLI::Option* opt_fraction =
      inp->add_option("--mask-fraction", i_fraction,
                      "share of pixels to hide at random")
          ->check(CLI::Range(0.0, 1.0))
          ->capture_default_str();
  inp->add_option("--mask-seed", i_mask_seed, "random-mask seed")->capture_default_str();
  inp->add_option("--mask-file", i_mask_file,
                  "graymap whose zero pixels mark missing data")
      ->excludes(opt_fraction);
  std::string inp_profile = "fpca";
  add_solver_flags(inp, inp_profile, overrides);
  inp->add_option("--seed", seed, "sampling-SVD seed")->capture_default_str();
  inp->add_option("--out", out, "output graymap path");
  inp->add_option("--truth", i_truth, "clean image for the error report");
  inp->add_option("--log", log_path, "JSON-lines progress log path");

  // eval-nmae
  std::string e_ratings;
  double e_min = -10.0, e_max = 10.0;
  int e_holdout = 2;
  CLI::App* ev = app.add_subcommand(
      "eval-nmae", "Hold out ratings per user and score their predictions");
  ev->add_option("--ratings", e_ratings, "ratings CSV (user,item,rating)")->required();
  ev->add_option("--rating-min", e_min)->capture_default_str();
  ev->add_option("--rating-max", e_max)->capture_default_str();
  ev->add_option("--holdout", e_holdout, "ratings withheld per user")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_solver_flags(ev, profile, overrides);
  ev->add_option("--seed", seed, "holdout seed")->capture_default_str();
  ev->add_option("--log", log_path, "JSON-lines progress log path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!log_path.empty()) log.open(log_path);
    if (gen->parsed()) {
      return run_generate(g_rows, g_cols, g_rank, g_samples, seed, out,
                          g_truth_out);
    }
    if (solve->parsed()) {
      return run_solve(s_data, profile, overrides, seed, out, s_truth, log);
    }
    if (bench->parsed()) {
      std::vector<fpc::GridCell> grid;
      if (!b_grid.empty()) {
        grid = parse_grid_file(b_grid);
      } else {
        grid.push_back({b_rows, b_cols, b_rank, b_samples});
      }
      return run_benchmark(grid, b_trials, profile, seed, b_jobs, out, log);
    }
    if (inp->parsed()) {
      return run_inpaint(i_image, i_fraction, i_mask_seed, i_mask_file,
                         inp_profile, overrides, seed, out, i_truth, log);
    }
    if (ev->parsed()) {
      return run_eval_nmae(e_ratings, e_min, e_max, e_holdout, profile,
                           overrides, seed, log);
    }
  } catch (const fpc::SolverFault& e) {
    std::fprintf(stderr, "solver abort: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
