#include "lsrn/linop.hpp"
#include "lsrn/parallel.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace lsrn;
using testing_support::random_matrix;
using testing_support::random_vector;
using testing_support::rel_err;

namespace {

RowMatrix rows_of(const Matrix& m) { return m; }

CsrMatrix sparse_random(Index rows, Index cols, double density, unsigned seed) {
  Matrix a = random_matrix(rows, cols, seed);
  std::mt19937 rng(seed + 1);
  std::bernoulli_distribution keep(density);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i)
      if (!keep(rng)) a(i, j) = 0.0;
  return CsrMatrix::from_dense(a);
}

// |<Ax, u> - <x, A^T u>| relative to ||A||_F ||x|| ||u||.
double adjoint_gap(const LinearOperator& a, unsigned seed) {
  const Vector x = random_vector(a.cols(), seed);
  const Vector u = random_vector(a.rows(), seed + 7);
  const double lhs = a.apply(x).dot(u);
  const double rhs = x.dot(a.apply_adjoint(u));
  return std::abs(lhs - rhs) / (a.to_dense().norm() * x.norm() * u.norm());
}

std::vector<OperatorPtr> every_kind() {
  const auto dense = make_dense(rows_of(random_matrix(30, 7, 1)));
  const auto csr = make_csr(sparse_random(30, 7, 0.3, 2));
  const auto wide = make_dense(rows_of(random_matrix(30, 5, 3)));
  return {
      dense,
      csr,
      vstack({dense, csr, make_identity(7, 2.5)}),
      hcat({dense, wide, csr}),
      col_scaled(csr, random_vector(7, 4)),
      compose_right(dense, random_matrix(7, 4, 5)),
      compose_left(csr, random_matrix(30, 6, 6)),
  };
}

}  // namespace

TEST(Linop, IdentityApplyAndAdjoint) {
  const auto id = make_dense(RowMatrix::Identity(3, 3));
  EXPECT_EQ(id->apply(Vector::LinSpaced(3, 1, 3)), Vector::LinSpaced(3, 1, 3));
  EXPECT_EQ(id->apply_adjoint(Vector::LinSpaced(3, 4, 6)), Vector::LinSpaced(3, 4, 6));
}

TEST(Linop, TwoByTwo) {
  RowMatrix a(2, 2);
  a << 1, 2, 3, 4;
  const auto op = make_dense(a);
  EXPECT_EQ(op->apply(Vector::Ones(2)), (Vector(2) << 3, 7).finished());
  EXPECT_EQ(op->apply_adjoint((Vector(2) << 1, 0).finished()), (Vector(2) << 1, 2).finished());
}

TEST(Linop, CsrMatchesDense) {
  const CsrMatrix csr = sparse_random(50, 20, 0.4, 11);
  const auto sparse = make_csr(csr);
  const auto dense = make_dense(csr.to_dense());
  const Vector x = random_vector(20, 12);
  const Vector u = random_vector(50, 13);
  EXPECT_LE(rel_err(sparse->apply(x), dense->apply(x)), 1e-14);
  EXPECT_LE(rel_err(sparse->apply_adjoint(u), dense->apply_adjoint(u)), 1e-14);
  const Matrix xb = random_matrix(20, 9, 14);
  const Matrix ub = random_matrix(50, 9, 15);
  EXPECT_LE((sparse->apply_block(xb) - dense->apply_block(xb)).norm(), 1e-14 * dense->apply_block(xb).norm());
  EXPECT_LE((sparse->apply_adjoint_block(ub) - dense->apply_adjoint_block(ub)).norm(),
            1e-14 * dense->apply_adjoint_block(ub).norm());
}

TEST(Linop, AdjointIdentityEveryKind) {
  unsigned seed = 100;
  for (const auto& op : every_kind()) {
    SCOPED_TRACE(std::string(to_string(op->kind())));
    EXPECT_LE(adjoint_gap(*op, seed++), 1e-12);
  }
}

TEST(Linop, BlockProductsMatchColumnwise) {
  for (const auto& op : every_kind()) {
    SCOPED_TRACE(std::string(to_string(op->kind())));
    const Matrix x = random_matrix(op->cols(), 5, 21);
    const Matrix u = random_matrix(op->rows(), 5, 22);
    const Matrix y = op->apply_block(x);
    const Matrix z = op->apply_adjoint_block(u);
    for (Index j = 0; j < 5; ++j) {
      EXPECT_LE(rel_err(y.col(j), op->apply(x.col(j))), 1e-14);
      EXPECT_LE(rel_err(z.col(j), op->apply_adjoint(u.col(j))), 1e-14);
    }
  }
}

TEST(Linop, ExtendedKernelsAgreeWithDouble) {
  for (const auto& op : every_kind()) {
    SCOPED_TRACE(std::string(to_string(op->kind())));
    const Vector x = random_vector(op->cols(), 31);
    const Vector u = random_vector(op->rows(), 32);
    std::vector<Extended> xe(x.data(), x.data() + x.size()), ue(u.data(), u.data() + u.size());
    std::vector<Extended> y(static_cast<std::size_t>(op->rows())), z(static_cast<std::size_t>(op->cols()));
    op->apply_extended(xe, y);
    op->apply_adjoint_extended(ue, z);
    Vector yd(op->rows()), zd(op->cols());
    for (Index i = 0; i < op->rows(); ++i) yd[i] = static_cast<double>(y[i]);
    for (Index i = 0; i < op->cols(); ++i) zd[i] = static_cast<double>(z[i]);
    EXPECT_LE(rel_err(yd, op->apply(x)), 1e-13);
    EXPECT_LE(rel_err(zd, op->apply_adjoint(u)), 1e-13);
  }
}

TEST(Linop, AccurateResidualKeepsSubUlpParts) {
  RowMatrix a(1, 2);
  a << 1.0, 1.0;
  const auto op = make_dense(a);
  const Vector x = (Vector(2) << 1.0, 0x1p-60).finished();
  const Vector b = Vector::Ones(1);
  EXPECT_EQ((b - op->apply(x))[0], 0.0);
  const AccurateResidual res = accurate_residual(*op, x, b);
  if constexpr (std::numeric_limits<Extended>::digits >= 64) {
    EXPECT_EQ(res.residual[0], -0x1p-60);
    EXPECT_EQ(res.normal, Vector::Constant(2, -0x1p-60));
  } else {
    EXPECT_EQ(res.residual[0], 0.0);
  }
}

TEST(Linop, AccurateResidualMatchesDoubleOnBenignInput) {
  const auto op = make_csr(sparse_random(40, 10, 0.5, 91));
  const Vector x = random_vector(10, 92), b = random_vector(40, 93);
  const AccurateResidual res = accurate_residual(*op, x, b);
  const Vector r = b - op->apply(x);
  EXPECT_LE(rel_err(res.residual, r), 1e-14);
  EXPECT_LE(rel_err(res.normal, op->apply_adjoint(r)), 1e-13);
}

TEST(Linop, VStackIsConcatenation) {
  const auto a = make_dense(rows_of(random_matrix(6, 4, 41)));
  const auto w = make_csr(sparse_random(3, 4, 0.5, 42));
  const auto stacked = vstack({a, w});
  const Vector x = random_vector(4, 43);
  const Vector y = stacked->apply(x);
  EXPECT_EQ(y.head(6), a->apply(x));
  EXPECT_EQ(y.tail(3), w->apply(x));
}

TEST(Linop, ComposedMatchesTwoStepProduct) {
  const auto a = make_dense(rows_of(random_matrix(40, 8, 51)));
  const Matrix n = random_matrix(8, 5, 52);
  const auto an = compose_right(a, n);
  const Vector y = random_vector(5, 53);
  EXPECT_LE(rel_err(an->apply(y), a->apply(n * y)), 1e-14);
  const Matrix m = random_matrix(40, 6, 54);
  const auto ma = compose_left(a, m);
  const Vector x = random_vector(8, 55);
  EXPECT_LE(rel_err(ma->apply(x), m.transpose() * a->apply(x)), 1e-14);
}

TEST(Linop, DimensionErrorsNameLengths) {
  const auto op = make_dense(rows_of(random_matrix(5, 3, 61)));
  try {
    op->apply(Vector::Ones(4));
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("expected length 3, got 4"), std::string::npos);
  }
  EXPECT_THROW(op->apply_adjoint(Vector::Ones(3)), DimensionError);
  EXPECT_THROW(op->apply_block(Matrix::Ones(4, 2)), DimensionError);
}

TEST(Linop, NonFiniteInputRejected) {
  const auto op = make_dense(rows_of(random_matrix(5, 3, 62)));
  Vector x = Vector::Ones(3);
  x[1] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(op->apply(x), NonFiniteError);
  Vector u = Vector::Ones(5);
  u[0] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(op->apply_adjoint(u), NonFiniteError);
}

TEST(Linop, CsrInvariantsValidated) {
  CsrMatrix bad;
  bad.rows = 2;
  bad.cols = 2;
  bad.row_ptr = {0, 2, 1};
  bad.col_idx = {0, 1};
  bad.values = {1.0, 2.0};
  EXPECT_THROW(make_csr(bad), DimensionError);
  bad.row_ptr = {0, 1, 2};
  bad.col_idx = {0, 2};
  EXPECT_THROW(make_csr(bad), DimensionError);
  bad.col_idx = {0, 1};
  bad.row_ptr = {0, 1};
  EXPECT_THROW(make_csr(bad), DimensionError);
  bad.row_ptr = {0, 1, 3};
  EXPECT_THROW(make_csr(bad), DimensionError);
}

TEST(Linop, EmptyRowsAndZeroMatrix) {
  CsrMatrix z;
  z.rows = 4;
  z.cols = 3;
  z.row_ptr.assign(5, 0);
  const auto op = make_csr(z);
  EXPECT_EQ(op->apply(Vector::Ones(3)), Vector::Zero(4));
  EXPECT_EQ(op->apply_adjoint(Vector::Ones(4)), Vector::Zero(3));
  const auto dense_zero = make_dense(RowMatrix::Zero(4, 3));
  EXPECT_EQ(dense_zero->apply(Vector::Ones(3)), Vector::Zero(4));
}

TEST(Linop, VStackAndHCatShapeChecks) {
  const auto a = make_dense(rows_of(random_matrix(3, 2, 71)));
  const auto b = make_dense(rows_of(random_matrix(3, 4, 72)));
  EXPECT_THROW(vstack({a, b}), DimensionError);
  EXPECT_THROW(hcat({a, make_dense(rows_of(random_matrix(2, 2, 73)))}), DimensionError);
  EXPECT_THROW(vstack({}), DimensionError);
  EXPECT_EQ(hcat({a, b})->cols(), 6);
  EXPECT_EQ(vstack({a, make_identity(2)})->rows(), 5);
}

TEST(Linop, ResultIndependentOfWorkerCount) {
  const auto dense = make_dense(rows_of(random_matrix(2000, 300, 81)));
  const auto csr = make_csr(sparse_random(3000, 400, 0.1, 82));
  const Vector x = random_vector(300, 83), u = random_vector(2000, 84);
  const Vector xs = random_vector(400, 85), us = random_vector(3000, 86);
  const int saved = num_threads();
  set_num_threads(1);
  const Vector d1 = dense->apply(x), d2 = dense->apply_adjoint(u);
  const Vector s1 = csr->apply(xs), s2 = csr->apply_adjoint(us);
  set_num_threads(4);
  EXPECT_EQ(dense->apply(x), d1);
  EXPECT_EQ(dense->apply_adjoint(u), d2);
  EXPECT_EQ(csr->apply(xs), s1);
  EXPECT_EQ(csr->apply_adjoint(us), s2);
  set_num_threads(saved);
}
