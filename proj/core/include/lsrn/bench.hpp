#pragma once

#include "lsrn/solver.hpp"

#include <iosfwd>
#include <vector>

namespace lsrn::bench {

/// Sweep of kappa(AN) and LSQR iteration counts over the condition number of
/// A for several (rank, sample count) pairs.
struct CondConfig {
  Index m = 2000;
  Index n = 200;
  std::vector<double> conds{1e2, 1e4, 1e6, 1e8};
  /// (r, s) pairs; s must exceed n.
  std::vector<std::pair<Index, Index>> rank_samples{{200, 400}, {160, 320}, {100, 400}, {200, 300}};
  int trials = 10;
  double eps = 1e-14;
  std::uint64_t seed = 0;
};

struct CondRow {
  Index m = 0;
  Index n = 0;
  Index r = 0;
  Index s = 0;
  double cond = 0.0;
  int trials = 0;
  double max_kappa = 0.0;
  double mean_kappa = 0.0;
  Index max_iterations = 0;
  double reference_kappa = 0.0;   // (1 + sqrt(r/s)) / (1 - sqrt(r/s))
  Index iteration_reference = 0;  // ceil((ln eps - ln 2) / ln sqrt(r/s))
};

std::vector<CondRow> bench_cond(const CondConfig& config);

/// Stage timings of one generated problem across oversampling factors.
struct GammaConfig {
  Index m = 20000;
  Index n = 500;
  Index r = 500;
  double cond = 1e6;
  std::vector<double> gammas{1.2, 1.4, 1.6, 1.8, 2.0, 2.2, 2.4, 2.6, 2.8, 3.0};
  /// Each gamma is solved this many times; every stage keeps its minimum.
  int repeats = 3;
  double eps = 1e-14;
  std::uint64_t seed = 0;
};

struct GammaRow {
  double gamma = 0.0;
  Index s = 0;
  Index rank = 0;
  Index iterations = 0;
  StageTimings timings;
  double total = 0.0;  // sum of the four stage timings
};

std::vector<GammaRow> bench_gamma(const GammaConfig& config);

/// gamma such that sample_count(gamma, k) == s exactly.
double gamma_for_samples(Index s, Index k);

/// CSV output. The first line names the format version; column order is
/// fixed for a given version.
inline constexpr const char* kCondCsvVersion = "lsrn-bench-cond/1";
inline constexpr const char* kGammaCsvVersion = "lsrn-bench-gamma/1";

void write_cond_csv(std::ostream& out, const std::vector<CondRow>& rows);
void write_gamma_csv(std::ostream& out, const std::vector<GammaRow>& rows);

}  // namespace lsrn::bench
