#include "lsrn/krylov.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace lsrn {
namespace {

std::span<double> span_of(Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
std::span<const double> span_of(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

void check_rhs(const LinearOperator& a, const Eigen::Ref<const Vector>& b, const char* who) {
  if (b.size() != a.rows()) {
    throw DimensionError(std::string(who) + ": right-hand side has length " +
                         std::to_string(b.size()) + ", expected " + std::to_string(a.rows()));
  }
  if (!b.allFinite()) throw NonFiniteError(std::string(who) + ": right-hand side is not finite");
}

void require_finite(double v, const char* who) {
  if (!std::isfinite(v)) throw NonFiniteError(std::string(who) + ": non-finite value encountered");
}

// Explicit residual norms of the returned iterate.
void finish_stats(const LinearOperator& a, const Eigen::Ref<const Vector>& b, const Vector& x,
                  IterationStats& stats) {
  Vector ax(a.rows());
  a.apply_into(span_of(x), span_of(ax));
  const Vector r = b - ax;
  Vector atr(a.cols());
  a.apply_adjoint_into(span_of(r), span_of(atr));
  stats.final_residual_norm = r.norm();
  stats.normal_residual_norm = atr.norm();
}

}  // namespace

IterativeResult lsqr(const LinearOperator& a, const Eigen::Ref<const Vector>& b,
                     const LsqrOptions& options) {
  check_rhs(a, b, "lsqr");
  if (!(options.tol > 0.0)) throw Error("lsqr: tolerance must be positive");
  if (options.max_iter < 0) throw Error("lsqr: max_iter must be nonnegative");

  constexpr double kEps = std::numeric_limits<double>::epsilon();
  const Index m = a.rows();
  const Index n = a.cols();
  const double atol = options.tol;
  const double btol = options.tol;

  IterativeResult out;
  out.x = Vector::Zero(n);
  IterationStats& st = out.stats;

  Vector u = b;
  double beta = u.norm();
  Vector v = Vector::Zero(n);
  double alpha = 0.0;
  if (beta > 0.0) {
    u /= beta;
    a.apply_adjoint_into(span_of(u), span_of(v));
    alpha = v.norm();
    require_finite(alpha, "lsqr");
  }
  if (alpha > 0.0) v /= alpha;

  if (alpha * beta == 0.0) {
    // b = 0 or A^T b = 0: x = 0 is the minimum-length solution.
    st.converged = true;
    st.final_residual_norm = beta;
    st.normal_residual_norm = 0.0;
    return out;
  }

  Vector w = v;
  Vector tmp_m(m);
  Vector tmp_n(n);

  double rhobar = alpha;
  double phibar = beta;
  const double bnorm = beta;
  double anorm = 0.0;
  double xxnorm = 0.0;
  double z = 0.0;
  double cs2 = -1.0;
  double sn2 = 0.0;

  for (Index itn = 1; itn <= options.max_iter; ++itn) {
    // Continue the bidiagonalization.
    a.apply_into(span_of(v), span_of(tmp_m));
    u = tmp_m - alpha * u;
    beta = u.norm();
    require_finite(beta, "lsqr");
    if (beta > 0.0) {
      u /= beta;
      anorm = std::sqrt(anorm * anorm + alpha * alpha + beta * beta);
      a.apply_adjoint_into(span_of(u), span_of(tmp_n));
      v = tmp_n - beta * v;
      alpha = v.norm();
      require_finite(alpha, "lsqr");
      if (alpha > 0.0) v /= alpha;
    }

    // Plane rotation eliminating the subdiagonal of the bidiagonal matrix.
    const double rho = std::hypot(rhobar, beta);
    const double cs = rhobar / rho;
    const double sn = beta / rho;
    const double theta = sn * alpha;
    rhobar = -cs * alpha;
    const double phi = cs * phibar;
    phibar = sn * phibar;
    const double tau = sn * phi;

    const double t1 = phi / rho;
    const double t2 = -theta / rho;
    out.x += t1 * w;
    w = v + t2 * w;

    // Estimate ||x|| with a second rotation.
    const double delta = sn2 * rho;
    const double gambar = -cs2 * rho;
    const double rhs = phi - delta * z;
    const double zbar = rhs / gambar;
    const double xnorm = std::sqrt(xxnorm + zbar * zbar);
    const double gamma = std::hypot(gambar, theta);
    cs2 = gambar / gamma;
    sn2 = theta / gamma;
    z = rhs / gamma;
    xxnorm += z * z;

    const double rnorm = phibar;
    const double arnorm = alpha * std::abs(tau);
    st.iterations = itn;
    if (options.record_history) st.residual_history.push_back(rnorm);

    const double test1 = rnorm / bnorm;
    const double test2 = arnorm / (anorm * rnorm + kEps);
    const double t1s = test1 / (1.0 + anorm * xnorm / bnorm);
    const double rtol = btol + atol * anorm * xnorm / bnorm;

    if (test1 <= rtol || test2 <= atol || 1.0 + t1s <= 1.0 || 1.0 + test2 <= 1.0) {
      st.converged = true;
      break;
    }
  }

  require_finite(out.x.squaredNorm(), "lsqr");
  finish_stats(a, b, out.x, st);
  return out;
}

Index chebyshev_loop_bound(double sigma_lower, double sigma_upper, double eps) {
  if (!(sigma_lower > 0.0)) throw Error("chebyshev: sigma_lower must be positive");
  if (!(sigma_lower <= sigma_upper)) throw Error("chebyshev: sigma_lower exceeds sigma_upper");
  if (!(eps > 0.0)) throw Error("chebyshev: eps must be positive");
  if (sigma_lower == sigma_upper) return 0;
  const double rate = (sigma_upper - sigma_lower) / (sigma_upper + sigma_lower);
  const double k = std::ceil((std::log(eps) - std::log(2.0)) / std::log(rate));
  return k < 0.0 ? -1 : static_cast<Index>(k);
}

IterativeResult chebyshev(const LinearOperator& a, const Eigen::Ref<const Vector>& b,
                          double sigma_lower, double sigma_upper, const ChebyshevOptions& options) {
  check_rhs(a, b, "chebyshev");
  const Index last_k = chebyshev_loop_bound(sigma_lower, sigma_upper, options.eps);

  const double d = (sigma_upper * sigma_upper + sigma_lower * sigma_lower) / 2.0;
  const double c = (sigma_upper * sigma_upper - sigma_lower * sigma_lower) / 2.0;

  IterativeResult out;
  out.x = Vector::Zero(a.cols());
  Vector v = Vector::Zero(a.cols());
  Vector r = b;
  Vector atr(a.cols());
  Vector av(a.rows());
  double alpha = 0.0;
  double beta = 0.0;
  IterationStats& st = out.stats;
  st.converged = true;

  for (Index k = 0; k <= last_k; ++k) {
    if (k == 0) {
      beta = 0.0;
      alpha = 1.0 / d;
    } else if (k == 1) {
      beta = 0.5 * (c / d) * (c / d);
      alpha = 1.0 / (d - c * c / (2.0 * d));
    } else {
      beta = (alpha * c / 2.0) * (alpha * c / 2.0);
      alpha = 1.0 / (d - alpha * c * c / 4.0);
    }

    a.apply_adjoint_into(span_of(r), span_of(atr));
    if (options.check_every > 0 && k > 0 && k % options.check_every == 0 &&
        atr.norm() <= options.eps * sigma_upper * r.norm()) {
      break;
    }
    v = beta * v + atr;
    out.x += alpha * v;
    a.apply_into(span_of(v), span_of(av));
    r -= alpha * av;

    st.iterations = k + 1;
    if (options.record_history) st.residual_history.push_back(r.norm());
  }

  if (!out.x.allFinite()) throw NonFiniteError("chebyshev: non-finite value encountered");
  finish_stats(a, b, out.x, st);
  return out;
}

}  // namespace lsrn
