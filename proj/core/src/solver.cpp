#include "lsrn/solver.hpp"

#include "lsrn/diagnostics.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <string>

namespace lsrn {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void note(SolveReport& report, std::string message) {
  warn(message);
  report.warnings.push_back(std::move(message));
}

using SpdOp = std::function<Vector(const Vector&)>;

constexpr double kCorrectionTol = 1e-10;

// Conjugate gradients from zero; stops at ||res|| <= tol ||rhs||.
Vector conjugate_gradient(const SpdOp& op, const Vector& rhs, double tol, Index max_iter, Index& iters) {
  Vector x = Vector::Zero(rhs.size());
  Vector res = rhs;
  Vector p = res;
  double rr = res.squaredNorm();
  const double stop = tol * tol * rr;
  for (; iters < max_iter && rr > stop && rr > 0.0; ++iters) {
    const Vector ap = op(p);
    const double step = rr / p.dot(ap);
    x += step * p;
    res -= step * ap;
    const double rr_next = res.squaredNorm();
    p = res + (rr_next / rr) * p;
    rr = rr_next;
  }
  return x;
}

// Chebyshev iteration for an SPD operator with spectrum in [lo^2, hi^2]; no
// inner products. Runs the same number of passes as the least-squares loop.
Vector chebyshev_spd(const SpdOp& op, const Vector& rhs, double lo, double hi, double tol, Index& iters) {
  const double a = lo * lo;
  const double b = hi * hi;
  const double theta = 0.5 * (b + a);
  const double delta = 0.5 * (b - a);
  Vector x = Vector::Zero(rhs.size());
  if (delta == 0.0) {
    ++iters;
    return rhs / theta;
  }
  const Index passes = chebyshev_loop_bound(lo, hi, tol) + 1;
  const double sigma = theta / delta;
  double rho = 1.0 / sigma;
  Vector res = rhs;
  Vector d = res / theta;
  for (Index k = 0; k < passes; ++k) {
    x += d;
    res -= op(d);
    const double rho_next = 1.0 / (2.0 * sigma - rho);
    d = (rho_next * rho) * d + (2.0 * rho_next / delta) * res;
    rho = rho_next;
    ++iters;
  }
  return x;
}

// Extended-precision refinement of x toward the minimum-length solution.
// (A^T A)^+ is applied through the preconditioned operator:
//   tall, B = A N:    dx = N (B^T B)^{-1} N^T q
//   wide, C = M^T A:  dx = C^T (C C^T)^{-1} (M^T M) (C C^T)^{-1} C q
void refine(const LinearOperator& a, const Eigen::Ref<const Vector>& b, const LinearOperator& op,
            const Preconditioner& pre, const SolveOptions& opts, const SigmaBounds& bounds,
            Index max_iter, SolveReport& report) {
  const bool tall = pre.side == Orientation::tall;
  const SpdOp gram = tall ? SpdOp([&](const Vector& w) { return op.apply_adjoint(op.apply(w)); })
                          : SpdOp([&](const Vector& w) { return op.apply(op.apply_adjoint(w)); });
  const auto spd_solve = [&](const Vector& rhs) {
    if (opts.solver == IterativeMethod::lsqr) {
      return conjugate_gradient(gram, rhs, kCorrectionTol, max_iter, report.refinement_iterations);
    }
    return chebyshev_spd(gram, rhs, bounds.sigma_lower, bounds.sigma_upper, kCorrectionTol,
                         report.refinement_iterations);
  };
  const Matrix factor_gram = tall ? Matrix() : Matrix(pre.factor.transpose() * pre.factor);

  for (Index step = 0; step < opts.refine_steps; ++step) {
    const Vector q = accurate_residual(a, report.x, b).normal;
    if (q.squaredNorm() == 0.0) break;
    Vector dx;
    if (tall) {
      dx = pre.factor * spd_solve(pre.factor.transpose() * q);
    } else {
      const Vector u = spd_solve(op.apply(q));
      dx = op.apply_adjoint(spd_solve(factor_gram * u));
    }
    if (!dx.allFinite()) break;
    report.x += dx;
    ++report.refinement_steps;
    if (dx.norm() <= opts.eps * report.x.norm()) break;
  }
}

}  // namespace

const char* to_string(IterativeMethod m) noexcept { return m == IterativeMethod::lsqr ? "lsqr" : "cs"; }

IterativeMethod parse_method(const std::string& name) {
  if (name == "lsqr") return IterativeMethod::lsqr;
  if (name == "cs" || name == "chebyshev") return IterativeMethod::cs;
  throw Error("unknown solver '" + name + "' (expected lsqr or cs)");
}

void SolveOptions::validate() const {
  if (!(gamma > 1.0) || !std::isfinite(gamma)) {
    throw Error("oversampling factor must exceed 1 (got " + std::to_string(gamma) + ")");
  }
  if (!(eps > 0.0 && eps < 1.0)) throw Error("eps must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw Error("delta must lie in (0, 1)");
  if (max_iter && *max_iter < 0) throw Error("max_iter must be nonnegative");
  if (rank_tol && !(*rank_tol >= 0.0)) throw Error("rank_tol must be nonnegative");
  if (refine_steps < 0) throw Error("refine_steps must be nonnegative");
}

Index iteration_bound(double eps, Index r, Index s, double alpha) {
  if (!(eps > 0.0)) throw Error("iteration_bound: eps must be positive");
  if (r < 1 || s < 1) throw Error("iteration_bound: r and s must be positive");
  const double rate = alpha + std::sqrt(static_cast<double>(r) / static_cast<double>(s));
  if (!(rate > 0.0 && rate < 1.0)) throw Error("oversampling too small for requested alpha");
  const double bound = std::ceil((std::log(eps) - std::log(2.0)) / std::log(rate));
  return bound <= 0.0 ? 0 : static_cast<Index>(bound);
}

OperatorPtr borrow(const LinearOperator& a) { return OperatorPtr(std::shared_ptr<void>(), &a); }

SolveReport solve(const LinearOperator& a, const Eigen::Ref<const Vector>& b, const SolveOptions& opts) {
  opts.validate();
  if (b.size() != a.rows()) {
    throw DimensionError("solve: right-hand side has length " + std::to_string(b.size()) +
                         ", expected " + std::to_string(a.rows()));
  }
  const SketchSide side = a.rows() >= a.cols() ? SketchSide::left : SketchSide::right;
  const GaussianSource source(opts.seed, opts.gauss_block);
  const SketchResult sk = sketch(a, opts.gamma, side, source, opts.sketch);
  return solve_with_sketch(a, b, sk, opts);
}

SolveReport solve_with_sketch(const LinearOperator& a, const Eigen::Ref<const Vector>& b,
                              const SketchResult& sk, const SolveOptions& opts) {
  const auto t_start = Clock::now();
  opts.validate();
  const Index m = a.rows();
  const Index n = a.cols();
  if (b.size() != m) {
    throw DimensionError("solve: right-hand side has length " + std::to_string(b.size()) +
                         ", expected " + std::to_string(m));
  }
  if (!b.allFinite()) throw NonFiniteError("solve: right-hand side is not finite");

  SolveReport report;
  report.m = m;
  report.n = n;
  report.orientation = m >= n ? Orientation::tall : Orientation::wide;
  report.gamma = opts.gamma;
  report.eps = opts.eps;
  report.delta = opts.delta;
  report.seed = sk.seed;
  report.solver = opts.solver;
  report.s = sk.s;

  const bool tall = report.orientation == Orientation::tall;
  if ((sk.side == SketchSide::left) != tall) {
    throw Error("solve: sketch side does not match the problem orientation");
  }
  if (sk.a_tilde.rows() != (tall ? sk.s : m) || sk.a_tilde.cols() != (tall ? n : sk.s)) {
    throw DimensionError("solve: sketch shape does not match the operator");
  }
  if (m == n) note(report, "square system routed to the over-determined path");
  const double aspect = static_cast<double>(m) / static_cast<double>(n);
  if (aspect >= 0.5 && aspect <= 2.0) {
    note(report, "aspect ratio m/n = " + std::to_string(aspect) +
                     " is not strongly rectangular; random projection gains little");
  }

  report.timings.randn = sk.randn_seconds;
  report.timings.mult = sk.mult_seconds;

  auto t0 = Clock::now();
  auto pre = std::make_shared<Preconditioner>(factor_sketch(sk, opts.rank_tol));
  report.timings.svd = seconds_since(t0);
  report.detected_rank = pre->rank;
  const Index r = pre->rank;
  const Index s = sk.s;
  if (s <= r) {
    throw Error("solve: sketch size " + std::to_string(s) + " does not exceed rank " +
                std::to_string(r));
  }

  // alpha: explicit, or derived from delta and capped at half the admissible
  // range; near 1 - sqrt(r/s) the bounds are too loose to be useful.
  const double alpha_max = 1.0 - std::sqrt(static_cast<double>(r) / static_cast<double>(s));
  double alpha = 0.0;
  if (opts.alpha) {
    alpha = *opts.alpha;
    if (!(alpha > 0.0 && alpha < alpha_max)) {
      throw Error("oversampling too small for requested alpha = " + std::to_string(alpha) +
                  " (must lie in (0, " + std::to_string(alpha_max) + "))");
    }
  } else {
    alpha = alpha_for_failure_probability(s, opts.delta);
    const double cap = 0.5 * alpha_max;
    // Recorded but not printed: with the default delta this is the usual case
    // for s below about a thousand.
    if (alpha >= alpha_max) {
      report.warnings.push_back("alpha = " + std::to_string(alpha) + " for delta = " +
                                std::to_string(opts.delta) + " exceeds 1 - sqrt(r/s) = " +
                                std::to_string(alpha_max) + "; using " + std::to_string(cap));
    }
    if (alpha > cap) {
      alpha = cap;
      report.alpha_clamped = true;
    }
  }
  report.sigma_bounds = sigma_bounds(s, r, alpha);
  report.iteration_bound = iteration_bound(opts.eps, r, s, alpha);
  report.max_iter = opts.max_iter.value_or(2 * report.iteration_bound);

  t0 = Clock::now();
  const OperatorPtr op = precondition(borrow(a), *pre);
  Vector rhs;
  if (tall) {
    rhs = b;
  } else {
    rhs = pre->factor.transpose() * b;
  }

  IterativeResult it;
  if (b.squaredNorm() == 0.0) {
    it.x = Vector::Zero(op->cols());
    it.stats.converged = true;
  } else if (opts.solver == IterativeMethod::lsqr) {
    it = lsqr(*op, rhs, LsqrOptions{opts.eps, report.max_iter, opts.record_history});
  } else {
    ChebyshevOptions co;
    co.eps = opts.eps;
    co.check_every = opts.cs_check_every;
    co.record_history = opts.record_history;
    it = chebyshev(*op, rhs, report.sigma_bounds, co);
  }

  report.x = tall ? Vector(pre->factor * it.x) : std::move(it.x);
  report.iteration_stats = std::move(it.stats);
  if (report.iteration_stats.converged && b.squaredNorm() != 0.0) {
    refine(a, b, *op, *pre, opts, report.sigma_bounds, report.max_iter, report);
  }
  // Residual norms of the original system.
  const AccurateResidual res = accurate_residual(a, report.x, b);
  report.iteration_stats.final_residual_norm = res.residual.norm();
  report.iteration_stats.normal_residual_norm = res.normal.norm();
  report.timings.iter = seconds_since(t0);

  if (!report.iteration_stats.converged) {
    note(report, "iterative solver stopped at max_iter = " + std::to_string(report.max_iter) +
                     " without meeting the tolerance");
  }
  report.preconditioner = std::move(pre);
  report.wall_seconds = sk.elapsed + seconds_since(t_start);
  return report;
}

}  // namespace lsrn
