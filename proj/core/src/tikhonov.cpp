#include "lsrn/tikhonov.hpp"

#include "lsrn/parallel.hpp"

#include <Eigen/LU>

#include <chrono>
#include <functional>
#include <cmath>
#include <string>

namespace lsrn {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

OperatorPtr regularizer_operator(const RidgeSpec& spec, Index n) {
  switch (spec.kind) {
    case RidgeSpec::Kind::scalar:
      return make_identity(n, spec.lambda);
    case RidgeSpec::Kind::diagonal:
      if (spec.diagonal_entries.size() != n) {
        throw DimensionError("ridge: diagonal regularizer has length " +
                             std::to_string(spec.diagonal_entries.size()) + ", expected " +
                             std::to_string(n));
      }
      return make_csr(CsrMatrix::diagonal(spec.diagonal_entries));
    case RidgeSpec::Kind::general:
      if (!spec.w) throw Error("ridge: null regularizer");
      if (spec.w->rows() != n || spec.w->cols() != n) {
        throw DimensionError("ridge: W must be " + std::to_string(n) + "x" + std::to_string(n) +
                             ", got " + std::to_string(spec.w->rows()) + "x" +
                             std::to_string(spec.w->cols()));
      }
      return spec.w;
  }
  throw Error("ridge: unknown regularizer kind");
}

// W^{-1} z applied to the recovered z, together with the operator A W^{-1}.
struct InverseRegularizer {
  OperatorPtr a_winv;
  std::function<Vector(const Vector&)> apply_inverse;
};

InverseRegularizer invert_regularizer(const RidgeSpec& spec, const OperatorPtr& a) {
  const Index n = a->cols();
  switch (spec.kind) {
    case RidgeSpec::Kind::scalar: {
      if (spec.lambda == 0.0) throw Error("ridge: W = 0 is singular");
      const double inv = 1.0 / spec.lambda;
      return {col_scaled(a, Vector::Constant(n, inv)), [inv](const Vector& z) { return Vector(inv * z); }};
    }
    case RidgeSpec::Kind::diagonal: {
      if (spec.diagonal_entries.size() != n) {
        throw DimensionError("ridge: diagonal regularizer has length " +
                             std::to_string(spec.diagonal_entries.size()) + ", expected " +
                             std::to_string(n));
      }
      if ((spec.diagonal_entries.array() == 0.0).any()) throw Error("ridge: diagonal W is singular");
      Vector inv = spec.diagonal_entries.cwiseInverse();
      return {col_scaled(a, inv), [inv](const Vector& z) { return Vector(inv.cwiseProduct(z)); }};
    }
    case RidgeSpec::Kind::general: {
      if (!spec.allow_general_inverse) {
        throw Error("ridge: an under-determined problem needs W^{-1}; a general W must be "
                    "inverted densely, enable allow_general_inverse to do so");
      }
      const Matrix w = regularizer_operator(spec, n)->to_dense();
      Eigen::FullPivLU<Matrix> lu(w);
      if (!lu.isInvertible()) throw Error("ridge: W is singular");
      Matrix winv = lu.inverse();
      return {compose_right(a, winv), [winv](const Vector& z) { return Vector(winv * z); }};
    }
  }
  throw Error("ridge: unknown regularizer kind");
}

}  // namespace

RidgeSpec RidgeSpec::scalar(double lambda) {
  if (!std::isfinite(lambda) || lambda < 0.0) throw Error("ridge: lambda must be finite and >= 0");
  RidgeSpec s;
  s.kind = Kind::scalar;
  s.lambda = lambda;
  return s;
}

RidgeSpec RidgeSpec::diagonal(Vector w) {
  if (!w.allFinite()) throw NonFiniteError("ridge: diagonal regularizer is not finite");
  RidgeSpec s;
  s.kind = Kind::diagonal;
  s.diagonal_entries = std::move(w);
  return s;
}

RidgeSpec RidgeSpec::general(OperatorPtr w, bool allow_general_inverse) {
  RidgeSpec s;
  s.kind = Kind::general;
  s.w = std::move(w);
  s.allow_general_inverse = allow_general_inverse;
  return s;
}

SolveReport solve_ridge(const LinearOperator& a, const Eigen::Ref<const Vector>& b,
                        const RidgeSpec& spec, const SolveOptions& opts) {
  const Index m = a.rows();
  const Index n = a.cols();
  if (b.size() != m) {
    throw DimensionError("ridge: right-hand side has length " + std::to_string(b.size()) +
                         ", expected " + std::to_string(m));
  }
  const OperatorPtr ap = borrow(a);

  if (m >= n) {
    const OperatorPtr stacked = vstack({ap, regularizer_operator(spec, n)});
    Vector rhs = Vector::Zero(m + n);
    rhs.head(m) = b;
    SolveReport report = solve(*stacked, rhs, opts);
    report.m = m;
    report.n = n;
    return report;
  }

  const InverseRegularizer inv = invert_regularizer(spec, ap);
  const OperatorPtr augmented = hcat({inv.a_winv, make_identity(m)});
  SolveReport report = solve(*augmented, b, opts);
  const auto t0 = Clock::now();
  const Vector z = report.x.head(n);
  report.x = inv.apply_inverse(z);
  report.timings.iter += seconds_since(t0);
  report.m = m;
  report.n = n;
  return report;
}

RidgePath::RidgePath(OperatorPtr a, SolveOptions opts) : a_(std::move(a)), opts_(std::move(opts)) {
  if (!a_) throw Error("ridge path: null operator");
  if (a_->rows() < a_->cols()) {
    throw Error("ridge path: sketch reuse is implemented for over-determined problems only");
  }
  opts_.validate();
  const GaussianSource source(opts_.seed, opts_.gauss_block);
  cached_ = sketch(*a_, opts_.gamma, SketchSide::left, source, opts_.sketch);
}

SolveReport RidgePath::solve(const Eigen::Ref<const Vector>& b, const RidgeSpec& spec) const {
  const Index m = a_->rows();
  const Index n = a_->cols();
  if (b.size() != m) {
    throw DimensionError("ridge path: right-hand side has length " + std::to_string(b.size()) +
                         ", expected " + std::to_string(m));
  }
  const OperatorPtr w = regularizer_operator(spec, n);
  const OperatorPtr stacked = vstack({a_, w});
  const GaussianSource source(opts_.seed, opts_.gauss_block);

  // G_W: columns [m, m + n) of the stacked Gaussian matrix, applied to W in
  // the same row blocks the full sketch uses.
  const Index s = cached_.s;
  const Index block = opts_.sketch.block_rows;
  SketchResult sk = cached_;
  double randn_time = 0.0;
  double mult_time = 0.0;
  for (Index r0 = 0; r0 < s; r0 += block) {
    const Index len = std::min(block, s - r0);
    auto t0 = Clock::now();
    RowMatrix gw(len, n);
    parallel_for(static_cast<std::size_t>(len), [&](std::size_t i) {
      const Index row = r0 + static_cast<Index>(i);
      source.fill_row(row, m, m + n,
                      {gw.data() + i * static_cast<std::size_t>(n), static_cast<std::size_t>(n)});
    });
    randn_time += seconds_since(t0);
    t0 = Clock::now();
    Eigen::Map<const Matrix> gwt(gw.data(), n, len);
    Matrix part(n, len);
    w->apply_adjoint_block_into(gwt, part);
    sk.a_tilde.middleRows(r0, len) += part.transpose();
    mult_time += seconds_since(t0);
  }
  sk.randn_seconds = randn_time;
  sk.mult_seconds = mult_time;
  sk.elapsed = randn_time + mult_time;

  Vector rhs = Vector::Zero(m + n);
  rhs.head(m) = b;
  SolveReport report = solve_with_sketch(*stacked, rhs, sk, opts_);
  report.m = m;
  report.n = n;
  return report;
}

}  // namespace lsrn
