#include "lsrn/bench.hpp"

#include "lsrn/lab.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>

namespace lsrn::bench {
namespace {

std::uint64_t trial_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t z = base;
  for (const std::uint64_t v : {a, b, c}) {
    z += 0x9E3779B97F4A7C15ULL + v;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
  }
  return z;
}

}  // namespace

double gamma_for_samples(Index s, Index k) {
  if (s <= k) throw Error("gamma_for_samples: s must exceed " + std::to_string(k));
  double gamma = static_cast<double>(s) / static_cast<double>(k);
  while (sample_count(gamma, k) > s) gamma = std::nextafter(gamma, 0.0);
  while (sample_count(gamma, k) < s) gamma = std::nextafter(gamma, 2.0 * gamma);
  return gamma;
}

std::vector<CondRow> bench_cond(const CondConfig& config) {
  std::vector<CondRow> rows;
  for (const auto& [r, s] : config.rank_samples) {
    if (s <= config.n) {
      throw Error("bench-cond: s = " + std::to_string(s) + " must exceed n = " + std::to_string(config.n));
    }
    for (std::size_t ci = 0; ci < config.conds.size(); ++ci) {
      CondRow row;
      row.m = config.m;
      row.n = config.n;
      row.r = r;
      row.s = s;
      row.cond = config.conds[ci];
      row.trials = config.trials;
      row.reference_kappa = kappa_bound(s, r, 0.0);
      row.iteration_reference = iteration_bound(config.eps, r, s, 0.0);

      double sum = 0.0;
      for (int t = 0; t < config.trials; ++t) {
        const std::uint64_t seed =
            trial_seed(config.seed, static_cast<std::uint64_t>(r * 1000003 + s), ci, static_cast<std::uint64_t>(t));
        lab::ProblemSpec spec{config.m, config.n, r, config.conds[ci], seed, 0.5};
        const lab::Problem prob = lab::gen_problem(spec);

        SolveOptions opts;
        opts.gamma = gamma_for_samples(s, std::min(config.m, config.n));
        opts.eps = config.eps;
        opts.seed = seed ^ 0xA5A5A5A5A5A5A5A5ULL;
        const SolveReport rep = solve(*prob.a, prob.b, opts);
        const double kappa = lab::measure_kappa(*prob.a, *rep.preconditioner);
        row.max_kappa = std::max(row.max_kappa, kappa);
        sum += kappa;
        row.max_iterations = std::max(row.max_iterations, rep.iteration_stats.iterations);
      }
      row.mean_kappa = config.trials > 0 ? sum / config.trials : 0.0;
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<GammaRow> bench_gamma(const GammaConfig& config) {
  lab::ProblemSpec spec{config.m, config.n, config.r, config.cond, config.seed, 0.5};
  const lab::Problem prob = lab::gen_problem(spec);

  std::vector<GammaRow> rows;
  for (const double gamma : config.gammas) {
    GammaRow row;
    row.gamma = gamma;
    constexpr double kInf = std::numeric_limits<double>::infinity();
    row.timings = {kInf, kInf, kInf, kInf};
    for (int rep = 0; rep < std::max(1, config.repeats); ++rep) {
      SolveOptions opts;
      opts.gamma = gamma;
      opts.eps = config.eps;
      opts.seed = config.seed + 1;
      const SolveReport report = solve(*prob.a, prob.b, opts);
      row.s = report.s;
      row.rank = report.detected_rank;
      row.iterations = report.iteration_stats.iterations;
      row.timings.randn = std::min(row.timings.randn, report.timings.randn);
      row.timings.mult = std::min(row.timings.mult, report.timings.mult);
      row.timings.svd = std::min(row.timings.svd, report.timings.svd);
      row.timings.iter = std::min(row.timings.iter, report.timings.iter);
    }
    row.total = row.timings.sum();
    rows.push_back(row);
  }
  return rows;
}

void write_cond_csv(std::ostream& out, const std::vector<CondRow>& rows) {
  out << "# " << kCondCsvVersion << '\n';
  out << "m,n,r,s,cond,trials,max_kappa,mean_kappa,max_iterations,reference_kappa,iteration_reference\n";
  out << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.m << ',' << r.n << ',' << r.r << ',' << r.s << ',' << r.cond << ',' << r.trials << ','
        << r.max_kappa << ',' << r.mean_kappa << ',' << r.max_iterations << ',' << r.reference_kappa
        << ',' << r.iteration_reference << '\n';
  }
}

void write_gamma_csv(std::ostream& out, const std::vector<GammaRow>& rows) {
  out << "# " << kGammaCsvVersion << '\n';
  out << "gamma,s,rank,iterations,randn,mult,svd,iter,total\n";
  out << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.gamma << ',' << r.s << ',' << r.rank << ',' << r.iterations << ',' << r.timings.randn
        << ',' << r.timings.mult << ',' << r.timings.svd << ',' << r.timings.iter << ',' << r.total
        << '\n';
  }
}

}  // namespace lsrn::bench
