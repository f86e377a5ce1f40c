#pragma once

#include "lsrn/krylov.hpp"
#include "lsrn/precond.hpp"
#include "lsrn/sketch.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lsrn {

enum class IterativeMethod { lsqr, cs };

const char* to_string(IterativeMethod m) noexcept;
IterativeMethod parse_method(const std::string& name);

struct SolveOptions {
  double gamma = 2.0;   // oversampling factor, s = ceil(gamma * min(m, n))
  double eps = 1e-14;   // iteration tolerance
  double delta = 0.01;  // failure-probability budget; sets alpha when alpha is unset
  std::optional<double> alpha;
  IterativeMethod solver = IterativeMethod::lsqr;
  std::uint64_t seed = 0;
  std::optional<double> rank_tol;
  std::optional<Index> max_iter;
  bool record_history = false;
  Index cs_check_every = 0;
  /// Refinement steps after the iteration. Each step forms A^T (b - A x) in
  /// extended precision and solves for a correction with the same
  /// preconditioner (CG for lsqr, Chebyshev for cs). 0 disables.
  Index refine_steps = 2;
  std::size_t gauss_block = GaussianSource::kDefaultBlockSize;
  SketchOptions sketch;

  /// Throws Error unless gamma > 1, 0 < eps < 1 and 0 < delta < 1.
  void validate() const;
};

struct StageTimings {
  double randn = 0.0;
  double mult = 0.0;
  double svd = 0.0;
  double iter = 0.0;

  double sum() const noexcept { return randn + mult + svd + iter; }
};

struct SolveReport {
  Vector x;
  Index m = 0;
  Index n = 0;
  Orientation orientation = Orientation::tall;
  Index s = 0;
  Index detected_rank = 0;
  SigmaBounds sigma_bounds;
  bool alpha_clamped = false;     // alpha from delta was capped at (1 - sqrt(r/s)) / 2
  Index iteration_bound = 0;  // at the alpha in sigma_bounds
  Index max_iter = 0;
  IterationStats iteration_stats;  // main iteration; norms are of the final x
  Index refinement_steps = 0;
  Index refinement_iterations = 0;
  StageTimings timings;
  double wall_seconds = 0.0;
  // Effective settings.
  double gamma = 0.0;
  double eps = 0.0;
  double delta = 0.0;
  std::uint64_t seed = 0;
  IterativeMethod solver = IterativeMethod::lsqr;
  std::vector<std::string> warnings;
  std::shared_ptr<const Preconditioner> preconditioner;
};

/// ceil((ln eps - ln 2) / ln(alpha + sqrt(r/s))). Throws when
/// alpha + sqrt(r/s) >= 1.
Index iteration_bound(double eps, Index r, Index s, double alpha);

/// Minimum-length solution of min ||A x - b||. m >= n runs the over-determined
/// path (sketch G A, right preconditioner N, x = N y); m < n the
/// under-determined path (sketch A G, left factor M, min ||M^T A x - M^T b||).
SolveReport solve(const LinearOperator& a, const Eigen::Ref<const Vector>& b,
                  const SolveOptions& opts = {});

/// Same as solve() with a precomputed sketch of A. The sketch side must match
/// the orientation of A.
SolveReport solve_with_sketch(const LinearOperator& a, const Eigen::Ref<const Vector>& b,
                              const SketchResult& sk, const SolveOptions& opts = {});

/// Wraps a reference as a non-owning OperatorPtr. The referent must outlive
/// every copy.
OperatorPtr borrow(const LinearOperator& a);

}  // namespace lsrn
