#pragma once

#include "lsrn/linop.hpp"
#include "lsrn/precond.hpp"

#include <vector>

namespace lsrn {

struct IterationStats {
  Index iterations = 0;
  double final_residual_norm = 0.0;   // ||b - A x||
  double normal_residual_norm = 0.0;  // ||A^T (b - A x)||
  bool converged = false;
  std::vector<double> residual_history;  // one entry per iteration when recorded
};

struct LsqrOptions {
  double tol = 1e-14;
  Index max_iter = 1000;
  bool record_history = false;
};

struct IterativeResult {
  Vector x;
  IterationStats stats;
};

/// LSQR from x0 = 0, so iterates stay in range(A^T) and
/// the limit is the minimum-length least-squares solution. Stops when
/// ||A^T r|| <= tol ||A|| ||r|| or ||r|| <= tol (||b|| + ||A|| ||x||), with
/// ||A||, ||r||, ||A^T r|| taken from the bidiagonalization recurrences.
/// Hitting max_iter is reported through stats.converged, not thrown.
IterativeResult lsqr(const LinearOperator& a, const Eigen::Ref<const Vector>& b, const LsqrOptions& options);

struct ChebyshevOptions {
  double eps = 1e-14;
  /// When > 0, checks ||A^T r|| <= eps sigma_U ||r|| every this many passes
  /// and stops early. 0 keeps the loop free of inner products.
  Index check_every = 0;
  bool record_history = false;
};

/// The loop bound K = ceil((ln eps - ln 2) / ln((sU - sL)/(sU + sL))), the
/// last value of k in the Chebyshev loop. The loop runs K + 1 passes.
Index chebyshev_loop_bound(double sigma_lower, double sigma_upper, double eps);

/// Chebyshev semi-iteration for min ||A x - b|| when every nonzero singular
/// value of A lies in [sigma_lower, sigma_upper].
IterativeResult chebyshev(const LinearOperator& a, const Eigen::Ref<const Vector>& b, double sigma_lower,
                     double sigma_upper, const ChebyshevOptions& options);

inline IterativeResult chebyshev(const LinearOperator& a, const Eigen::Ref<const Vector>& b,
                            const SigmaBounds& bounds, const ChebyshevOptions& options) {
  return chebyshev(a, b, bounds.sigma_lower, bounds.sigma_upper, options);
}

}  // namespace lsrn
