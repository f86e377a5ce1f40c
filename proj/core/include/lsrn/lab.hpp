#pragma once

#include "lsrn/linop.hpp"
#include "lsrn/precond.hpp"

#include <memory>
#include <optional>

namespace lsrn::lab {

/// Recipe for a random test problem A = U diag(sigma) V^T with r singular
/// values log-spaced from 1 down to 1/cond.
struct ProblemSpec {
  Index m = 0;
  Index n = 0;
  Index r = 0;
  double cond = 1.0;
  std::uint64_t seed = 0;
  /// ||b|| = 1 with ||P_range(A) b|| = sqrt(1 - noise_split^2) and
  /// ||(I - P_range(A)) b|| = noise_split. When range(A) is all of R^m the
  /// orthogonal part is necessarily zero.
  double noise_split = 0.5;

  void validate() const;
};

struct Problem {
  std::shared_ptr<const DenseOperator> a;
  Vector b;
  Vector x_star;           // minimum-length solution, V diag(1/sigma) U^T b
  Vector singular_values;  // the r prescribed values
  Matrix u;                // m x r orthonormal
  Matrix v;                // n x r orthonormal
};

Problem gen_problem(const ProblemSpec& spec);

/// Guard for the dense oracles: m * n must not exceed this.
inline constexpr Index kOracleMaxEntries = 10'000'000;

/// V_r diag(1/sigma_r) U_r^T b via a dense SVD in extended precision; r
/// counts sigma_i > rank_tol * sigma_1 (default max(m, n) * machine epsilon).
Vector minlen_oracle(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Vector>& b,
                     std::optional<double> rank_tol = std::nullopt);

/// Moore-Penrose pseudoinverse with the same rank rule.
Matrix pseudoinverse(const Eigen::Ref<const Matrix>& a, std::optional<double> rank_tol = std::nullopt);

/// Singular values (nonincreasing).
Vector singular_values(const Eigen::Ref<const Matrix>& a);

/// Number of singular values above rel_tol * sigma_1.
Index numerical_rank(const Eigen::Ref<const Matrix>& a, double rel_tol);

/// sigma_max / sigma_min over singular values above rel_tol * sigma_max.
double effective_condition(const Eigen::Ref<const Matrix>& a, std::optional<double> rel_tol = std::nullopt);

/// Densifies A N (tall) or M^T A (wide) and returns its effective condition
/// number.
double measure_kappa(const LinearOperator& a, const Preconditioner& p);

}  // namespace lsrn::lab
