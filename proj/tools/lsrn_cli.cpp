#include <CLI11.hpp>

#include "lsrn/bench.hpp"
#include "lsrn/lab.hpp"
#include "lsrn/matrix_market.hpp"
#include "lsrn/parallel.hpp"
#include "lsrn/report.hpp"
#include "lsrn/solver.hpp"
#include "lsrn/tikhonov.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct SolveArgs {
  std::string matrix;
  std::string rhs;
  std::string out;
  std::string report;
  std::string format = "json";
  double gamma = 2.0;
  double tol = 1e-14;
  std::optional<double> alpha;
  double delta = 0.01;
  std::string solver = "lsqr";
  std::uint64_t seed = 0;
  std::optional<double> rank_tol;
  std::optional<lsrn::Index> max_iter;
  std::optional<double> lambda;
  std::string w_file;
  bool history = false;
};

struct GenArgs {
  lsrn::lab::ProblemSpec spec;
  std::string dir = ".";
  std::string prefix;
};

struct CondArgs {
  lsrn::bench::CondConfig config;
  std::vector<std::string> pairs;
  std::string out;
};

struct GammaArgs {
  lsrn::bench::GammaConfig config;
  std::string out;
};

// Opens the named file, or returns stdout for "" and "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw lsrn::Error("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

int run_solve(const SolveArgs& args) {
  lsrn::SolveOptions opts;
  opts.gamma = args.gamma;
  opts.eps = args.tol;
  opts.alpha = args.alpha;
  opts.delta = args.delta;
  opts.solver = lsrn::parse_method(args.solver);
  opts.seed = args.seed;
  opts.rank_tol = args.rank_tol;
  opts.max_iter = args.max_iter;
  opts.record_history = args.history;
  opts.validate();
  const auto format = lsrn::parse_report_format(args.format);

  std::cerr << "lsrn: seed " << opts.seed << '\n';
  const lsrn::OperatorPtr a = lsrn::io::read_matrix_market(fs::path(args.matrix));
  const lsrn::Vector b = lsrn::io::read_vector(fs::path(args.rhs));
  if (b.size() != a->rows()) {
    throw lsrn::DimensionError("right-hand side has " + std::to_string(b.size()) +
                               " entries, matrix has " + std::to_string(a->rows()) + " rows");
  }

  lsrn::SolveReport report;
  if (!args.w_file.empty()) {
    if (a->rows() < a->cols()) {
      throw lsrn::Error("--w-file is only supported for over-determined systems; use --lambda");
    }
    report = lsrn::solve_ridge(*a, b, lsrn::RidgeSpec::general(lsrn::io::read_matrix_market(fs::path(args.w_file))), opts);
  } else if (args.lambda) {
    report = lsrn::solve_ridge(*a, b, lsrn::RidgeSpec::scalar(*args.lambda), opts);
  } else {
    report = lsrn::solve(*a, b, opts);
  }

  if (!args.out.empty()) lsrn::io::write_vector(fs::path(args.out), report.x);
  Output rep(args.report);
  lsrn::write_report(rep.stream(), report, format);
  return report.iteration_stats.converged ? 0 : 2;
}

int run_gen(const GenArgs& args) {
  const auto prob = lsrn::lab::gen_problem(args.spec);
  const fs::path dir(args.dir);
  fs::create_directories(dir);
  lsrn::io::write_matrix_market(dir / (args.prefix + "A.mtx"), prob.a->matrix());
  lsrn::io::write_vector(dir / (args.prefix + "b.txt"), prob.b);
  lsrn::io::write_vector(dir / (args.prefix + "x_star.txt"), prob.x_star);
  std::cerr << "lsrn: seed " << args.spec.seed << ", wrote " << (dir / (args.prefix + "A.mtx")).string()
            << '\n';
  return 0;
}

std::pair<lsrn::Index, lsrn::Index> parse_pair(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw lsrn::Error("expected r:s, got '" + text + "'");
  try {
    return {std::stoll(text.substr(0, colon)), std::stoll(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw lsrn::Error("expected r:s, got '" + text + "'");
  }
}

int run_bench_cond(CondArgs args) {
  if (!args.pairs.empty()) {
    args.config.rank_samples.clear();
    for (const auto& p : args.pairs) args.config.rank_samples.push_back(parse_pair(p));
  }
  std::cerr << "lsrn: seed " << args.config.seed << '\n';
  const auto rows = lsrn::bench::bench_cond(args.config);
  Output out(args.out);
  lsrn::bench::write_cond_csv(out.stream(), rows);
  return 0;
}

int run_bench_gamma(const GammaArgs& args) {
  std::cerr << "lsrn: seed " << args.config.seed << '\n';
  const auto rows = lsrn::bench::bench_gamma(args.config);
  Output out(args.out);
  lsrn::bench::write_gamma_csv(out.stream(), rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimum-length least squares by randomized preconditioning"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: hardware concurrency)")
      ->check(CLI::NonNegativeNumber);

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Solve min ||Ax - b|| from files");
  s->add_option("--matrix,-A", solve.matrix, "Matrix Market file")->required()->check(CLI::ExistingFile);
  s->add_option("--rhs,-b", solve.rhs, "Right-hand side, one value per line")->required()->check(CLI::ExistingFile);
  s->add_option("--out,-o", solve.out, "Solution output file");
  s->add_option("--report", solve.report, "Report file (default: stdout)");
  s->add_option("--format", solve.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  s->add_option("--gamma", solve.gamma, "Oversampling factor")->capture_default_str();
  s->add_option("--tol", solve.tol, "Iteration tolerance")->capture_default_str();
  s->add_option("--alpha", solve.alpha, "Bound parameter alpha (overrides --delta)");
  s->add_option("--delta", solve.delta, "Failure probability for the singular-value bounds")->capture_default_str();
  s->add_option("--solver", solve.solver, "lsqr or cs")->check(CLI::IsMember({"lsqr", "cs", "chebyshev"}));
  s->add_option("--seed", solve.seed, "Random seed")->capture_default_str();
  s->add_option("--rank-tol", solve.rank_tol, "Relative rank tolerance for the sketch");
  s->add_option("--max-iter", solve.max_iter, "Iteration cap");
  auto* lambda = s->add_option("--lambda", solve.lambda, "Ridge parameter, W = lambda I");
  s->add_option("--w-file", solve.w_file, "Regularizer W as Matrix Market (over-determined only)")
      ->check(CLI::ExistingFile)
      ->excludes(lambda);
  s->add_flag("--history", solve.history, "Record the residual history in the report");

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a test problem (A.mtx, b.txt, x_star.txt)");
  g->add_option("--m", gen.spec.m)->required();
  g->add_option("--n", gen.spec.n)->required();
  g->add_option("--r", gen.spec.r, "Rank (default min(m, n))");
  g->add_option("--cond", gen.spec.cond, "Effective condition number")->capture_default_str();
  g->add_option("--seed", gen.spec.seed)->capture_default_str();
  g->add_option("--noise-split", gen.spec.noise_split, "Norm of b outside range(A), with ||b|| = 1")
      ->capture_default_str();
  g->add_option("--dir", gen.dir, "Output directory")->capture_default_str();
  g->add_option("--prefix", gen.prefix, "File name prefix");

  CondArgs cond;
  auto* bc = app.add_subcommand("bench-cond", "Sweep kappa(AN) over cond(A) and (r, s)");
  bc->add_option("--m", cond.config.m)->capture_default_str();
  bc->add_option("--n", cond.config.n)->capture_default_str();
  bc->add_option("--conds", cond.config.conds, "Condition numbers");
  bc->add_option("--pairs", cond.pairs, "Rank and sample count as r:s");
  bc->add_option("--trials", cond.config.trials)->capture_default_str();
  bc->add_option("--tol", cond.config.eps)->capture_default_str();
  bc->add_option("--seed", cond.config.seed)->capture_default_str();
  bc->add_option("--out,-o", cond.out, "CSV output (default: stdout)");

  GammaArgs gamma;
  auto* bg = app.add_subcommand("bench-gamma", "Stage timings across oversampling factors");
  bg->add_option("--m", gamma.config.m)->capture_default_str();
  bg->add_option("--n", gamma.config.n)->capture_default_str();
  bg->add_option("--r", gamma.config.r)->capture_default_str();
  bg->add_option("--cond", gamma.config.cond)->capture_default_str();
  bg->add_option("--gammas", gamma.config.gammas, "Oversampling factors");
  bg->add_option("--repeats", gamma.config.repeats)->capture_default_str();
  bg->add_option("--tol", gamma.config.eps)->capture_default_str();
  bg->add_option("--seed", gamma.config.seed)->capture_default_str();
  bg->add_option("--out,-o", gamma.out, "CSV output (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (threads > 0) lsrn::set_num_threads(threads);
    if (*s) return run_solve(solve);
    if (*g) {
      if (gen.spec.r == 0) gen.spec.r = std::min(gen.spec.m, gen.spec.n);
      return run_gen(gen);
    }
    if (*bc) return run_bench_cond(cond);
    if (*bg) return run_bench_gamma(gamma);
  } catch (const std::exception& e) {
    std::cerr << "lsrn: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
