#include "lsrn/precond.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <string>

namespace lsrn {

Preconditioner factor_sketch(const SketchResult& sk, std::optional<double> rank_tol) {
  const Matrix& at = sk.a_tilde;
  if (at.size() == 0) throw DimensionError("factor_sketch: empty sketch");
  if (!at.allFinite()) throw NonFiniteError("factor_sketch: sketch contains NaN or infinity");

  const bool tall = sk.side == SketchSide::left;
  const unsigned options = tall ? Eigen::ComputeThinV : Eigen::ComputeThinU;
  Eigen::BDCSVD<Matrix> svd(at, options);
  if (svd.info() != Eigen::Success) throw Error("factor_sketch: SVD did not converge");

  const Vector& sv = svd.singularValues();
  const double tol = rank_tol.value_or(static_cast<double>(std::min(at.rows(), at.cols())) *
                                       std::numeric_limits<double>::epsilon());
  if (!(tol >= 0.0)) throw Error("factor_sketch: rank tolerance must be nonnegative");

  Index r = 0;
  if (sv.size() > 0 && sv[0] > 0.0) {
    const double cutoff = tol * sv[0];
    while (r < sv.size() && sv[r] > cutoff) ++r;
  }
  if (r == 0) throw Error("sketch has numerical rank 0");

  Preconditioner p;
  p.rank = r;
  p.sketch_singular_values = sv;
  p.side = tall ? Orientation::tall : Orientation::wide;
  p.samples = sk.s;
  const Vector inv = sv.head(r).cwiseInverse();
  if (tall) {
    p.factor = svd.matrixV().leftCols(r) * inv.asDiagonal();
  } else {
    p.factor = svd.matrixU().leftCols(r) * inv.asDiagonal();
  }
  return p;
}

double SigmaBounds::kappa_bound() const { return lsrn::kappa_bound(s, r, alpha); }

double SigmaBounds::contraction() const {
  return (sigma_upper - sigma_lower) / (sigma_upper + sigma_lower);
}

SigmaBounds sigma_bounds(Index s, Index r, double alpha) {
  if (r < 1) throw Error("sigma_bounds: rank must be at least 1");
  if (s <= r) {
    throw Error("sigma_bounds: sample count " + std::to_string(s) + " must exceed rank " +
                std::to_string(r));
  }
  const double ratio = std::sqrt(static_cast<double>(r) / static_cast<double>(s));
  if (!(alpha > 0.0 && alpha < 1.0 - ratio)) {
    throw Error("sigma_bounds: alpha = " + std::to_string(alpha) + " outside (0, " +
                std::to_string(1.0 - ratio) + ")");
  }
  const double rs = std::sqrt(static_cast<double>(s));
  const double rr = std::sqrt(static_cast<double>(r));
  SigmaBounds b;
  b.s = s;
  b.r = r;
  b.alpha = alpha;
  b.sigma_upper = 1.0 / ((1.0 - alpha) * rs - rr);
  b.sigma_lower = 1.0 / ((1.0 + alpha) * rs + rr);
  b.failure_prob = 2.0 * std::exp(-alpha * alpha * static_cast<double>(s) / 2.0);
  return b;
}

double kappa_bound(Index s, Index r, double alpha) {
  if (r < 1 || s <= r) throw Error("kappa_bound: need 1 <= r < s");
  const double ratio = std::sqrt(static_cast<double>(r) / static_cast<double>(s));
  if (!(alpha >= 0.0 && alpha < 1.0 - ratio)) {
    throw Error("kappa_bound: alpha = " + std::to_string(alpha) + " outside [0, " +
                std::to_string(1.0 - ratio) + ")");
  }
  return (1.0 + alpha + ratio) / (1.0 - alpha - ratio);
}

double alpha_for_failure_probability(Index s, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error("delta must lie in (0, 1)");
  if (s <= 0) throw Error("sample count must be positive");
  return std::sqrt(2.0 / static_cast<double>(s) * std::log(2.0 / delta));
}

OperatorPtr precondition(OperatorPtr a, const Preconditioner& p) {
  return p.side == Orientation::tall ? compose_right(std::move(a), p.factor)
                                     : compose_left(std::move(a), p.factor);
}

}  // namespace lsrn
