#pragma once

#include "lsrn/solver.hpp"

namespace lsrn {

/// Regularizer W in  min 1/2 ||A x - b||^2 + 1/2 ||W x||^2.
/// A scalar lambda means W = lambda I, so the normal equations read
/// (A^T A + lambda^2 I) x = A^T b.
struct RidgeSpec {
  enum class Kind { scalar, diagonal, general };

  Kind kind = Kind::scalar;
  double lambda = 0.0;
  Vector diagonal_entries;
  OperatorPtr w;
  /// Under-determined problems need W^{-1}. For a general W this is formed
  /// densely, which must be requested explicitly.
  bool allow_general_inverse = false;

  static RidgeSpec scalar(double lambda);
  static RidgeSpec diagonal(Vector w);
  static RidgeSpec general(OperatorPtr w, bool allow_general_inverse = false);
};

/// Over-determined A (m >= n): LSRN on [A; W] x ~ [b; 0].
/// Under-determined A: minimum-length (z; r) of [A W^{-1}, I_m] (z; r) = b,
/// then x = W^{-1} z.
SolveReport solve_ridge(const LinearOperator& a, const Eigen::Ref<const Vector>& b,
                        const RidgeSpec& spec, const SolveOptions& opts = {});

/// A sequence of ridge solves sharing one over-determined A. The stacked
/// sketch G [A; W] splits as G_A A + G_W W, so G_A A is computed once and only
/// G_W W is formed per regularizer. Results equal those of solve_ridge with
/// the same options.
class RidgePath {
 public:
  RidgePath(OperatorPtr a, SolveOptions opts);

  SolveReport solve(const Eigen::Ref<const Vector>& b, const RidgeSpec& spec) const;

  const SketchResult& cached_sketch() const noexcept { return cached_; }

 private:
  OperatorPtr a_;
  SolveOptions opts_;
  SketchResult cached_;
};

}  // namespace lsrn
