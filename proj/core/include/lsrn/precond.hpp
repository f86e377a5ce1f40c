#pragma once

#include "lsrn/sketch.hpp"

#include <optional>

namespace lsrn {

/// Right preconditioner N = V_r S_r^{-1} for tall problems (A N is well
/// conditioned) or left factor M = U_r S_r^{-1} for wide problems (M^T A).
struct Preconditioner {
  Matrix factor;                  // n x r (tall) or m x r (wide)
  Index rank = 0;
  Vector sketch_singular_values;  // all singular values of the sketch, nonincreasing
  Orientation side = Orientation::tall;
  Index samples = 0;              // sketch size s
};

/// Economy SVD of the sketch and rank truncation: keeps sigma_i > rank_tol *
/// sigma_1. Default rank_tol is min(rows, cols) of the sketch times machine
/// epsilon.
Preconditioner factor_sketch(const SketchResult& sk, std::optional<double> rank_tol = std::nullopt);

/// Probabilistic singular-value enclosure of the preconditioned operator:
/// P(sigma_max >= upper) and P(sigma_min <= lower) are each below
/// exp(-alpha^2 s / 2).
struct SigmaBounds {
  double sigma_lower = 0.0;
  double sigma_upper = 0.0;
  double alpha = 0.0;
  double failure_prob = 0.0;  // 2 exp(-alpha^2 s / 2)
  Index s = 0;
  Index r = 0;

  /// (1 + alpha + sqrt(r/s)) / (1 - alpha - sqrt(r/s))
  double kappa_bound() const;
  /// (sigma_U - sigma_L) / (sigma_U + sigma_L); equals alpha + sqrt(r/s).
  double contraction() const;
};

/// Requires r >= 1, s > r and 0 < alpha < 1 - sqrt(r/s).
SigmaBounds sigma_bounds(Index s, Index r, double alpha);

/// Condition-number bound with alpha allowed to be 0 (the reference curve
/// (1 + sqrt(r/s)) / (1 - sqrt(r/s)) at alpha = 0).
double kappa_bound(Index s, Index r, double alpha = 0.0);

/// alpha = sqrt((2/s) ln(2/delta)): the bounds then fail with probability at
/// most delta.
double alpha_for_failure_probability(Index s, double delta);

/// Preconditioned operator: A N (tall) or M^T A (wide).
OperatorPtr precondition(OperatorPtr a, const Preconditioner& p);

}  // namespace lsrn
