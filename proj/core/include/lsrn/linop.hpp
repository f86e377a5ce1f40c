#pragma once

#include "lsrn/common.hpp"

#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace lsrn {

enum class OperatorKind { dense, csr, vstack, hcat, col_scaled, precond_composed };

std::string_view to_string(OperatorKind kind) noexcept;

/// Compressed sparse row storage. Indices are 0-based.
struct CsrMatrix {
  Index rows = 0;
  Index cols = 0;
  std::vector<Index> row_ptr;  // rows + 1 entries
  std::vector<Index> col_idx;
  std::vector<double> values;

  Index nnz() const noexcept { return static_cast<Index>(values.size()); }

  /// Throws DimensionError when the structural invariants are violated.
  void validate() const;

  static CsrMatrix from_dense(const Eigen::Ref<const Matrix>& a, double drop_tol = 0.0);
  static CsrMatrix diagonal(const Vector& d);
  RowMatrix to_dense() const;
};

/// An m-by-n real linear map, touched only through products with vectors and
/// with blocks of vectors. Instances are immutable after construction and may
/// be applied concurrently.
class LinearOperator {
 public:
  LinearOperator(Index rows, Index cols);
  virtual ~LinearOperator() = default;

  LinearOperator(const LinearOperator&) = delete;
  LinearOperator& operator=(const LinearOperator&) = delete;

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  virtual OperatorKind kind() const noexcept = 0;

  /// y = A x. Rejects a wrong-length or non-finite x.
  Vector apply(const Eigen::Ref<const Vector>& x) const;
  /// y = A^T u. Rejects a wrong-length or non-finite u.
  Vector apply_adjoint(const Eigen::Ref<const Vector>& u) const;

  /// Y = A X for X with cols() rows.
  Matrix apply_block(const Eigen::Ref<const Matrix>& x) const;
  /// Y = A^T U for U with rows() rows.
  Matrix apply_adjoint_block(const Eigen::Ref<const Matrix>& u) const;

  /// Materializes the operator (A applied to the identity).
  Matrix to_dense() const;

  // Unchecked kernels. Output buffers are fully overwritten.
  virtual void apply_into(std::span<const double> x, std::span<double> y) const = 0;
  virtual void apply_adjoint_into(std::span<const double> u, std::span<double> y) const = 0;
  virtual void apply_block_into(const Eigen::Ref<const Matrix>& x, Eigen::Ref<Matrix> y) const;
  virtual void apply_adjoint_block_into(const Eigen::Ref<const Matrix>& u,
                                        Eigen::Ref<Matrix> y) const;

  // Products accumulated in extended precision; used to form residuals that
  // are accurate beyond working precision.
  virtual void apply_extended(std::span<const Extended> x, std::span<Extended> y) const = 0;
  virtual void apply_adjoint_extended(std::span<const Extended> u, std::span<Extended> y) const = 0;

 private:
  Index rows_;
  Index cols_;
};

using OperatorPtr = std::shared_ptr<const LinearOperator>;

class DenseOperator final : public LinearOperator {
 public:
  explicit DenseOperator(RowMatrix a);

  OperatorKind kind() const noexcept override { return OperatorKind::dense; }
  const RowMatrix& matrix() const noexcept { return a_; }

  void apply_into(std::span<const double> x, std::span<double> y) const override;
  void apply_adjoint_into(std::span<const double> u, std::span<double> y) const override;
  void apply_block_into(const Eigen::Ref<const Matrix>& x, Eigen::Ref<Matrix> y) const override;
  void apply_adjoint_block_into(const Eigen::Ref<const Matrix>& u,
                                Eigen::Ref<Matrix> y) const override;
  void apply_extended(std::span<const Extended> x, std::span<Extended> y) const override;
  void apply_adjoint_extended(std::span<const Extended> u, std::span<Extended> y) const override;

 private:
  RowMatrix a_;
};

/// CSR operator. A^T u is a transposed traversal of the same storage; no CSC
/// copy is kept.
class CsrOperator final : public LinearOperator {
 public:
  explicit CsrOperator(CsrMatrix a);

  OperatorKind kind() const noexcept override { return OperatorKind::csr; }
  const CsrMatrix& matrix() const noexcept { return a_; }

  void apply_into(std::span<const double> x, std::span<double> y) const override;
  void apply_adjoint_into(std::span<const double> u, std::span<double> y) const override;
  void apply_block_into(const Eigen::Ref<const Matrix>& x, Eigen::Ref<Matrix> y) const override;
  void apply_adjoint_block_into(const Eigen::Ref<const Matrix>& u,
                                Eigen::Ref<Matrix> y) const override;
  void apply_extended(std::span<const Extended> x, std::span<Extended> y) const override;
  void apply_adjoint_extended(std::span<const Extended> u, std::span<Extended> y) const override;

 private:
  void adjoint_rows(Index row_begin, Index row_end, std::span<const double> u,
                    std::span<double> y) const;

  CsrMatrix a_;
};

/// [A_1; A_2; ...] -- children share a column count.
class VStackOperator final : public LinearOperator {
 public:
  explicit VStackOperator(std::vector<OperatorPtr> children);

  OperatorKind kind() const noexcept override { return OperatorKind::vstack; }
  const std::vector<OperatorPtr>& children() const noexcept { return children_; }

  void apply_into(std::span<const double> x, std::span<double> y) const override;
  void apply_adjoint_into(std::span<const double> u, std::span<double> y) const override;
  void apply_block_into(const Eigen::Ref<const Matrix>& x, Eigen::Ref<Matrix> y) const override;
  void apply_adjoint_block_into(const Eigen::Ref<const Matrix>& u,
                                Eigen::Ref<Matrix> y) const override;
  void apply_extended(std::span<const Extended> x, std::span<Extended> y) const override;
  void apply_adjoint_extended(std::span<const Extended> u, std::span<Extended> y) const override;

 private:
  std::vector<OperatorPtr> children_;
};

/// [A_1, A_2, ...] -- children share a row count.
class HCatOperator final : public LinearOperator {
 public:
  explicit HCatOperator(std::vector<OperatorPtr> children);

  OperatorKind kind() const noexcept override { return OperatorKind::hcat; }
  const std::vector<OperatorPtr>& children() const noexcept { return children_; }

  void apply_into(std::span<const double> x, std::span<double> y) const override;
  void apply_adjoint_into(std::span<const double> u, std::span<double> y) const override;
  void apply_block_into(const Eigen::Ref<const Matrix>& x, Eigen::Ref<Matrix> y) const override;
  void apply_adjoint_block_into(const Eigen::Ref<const Matrix>& u,
                                Eigen::Ref<Matrix> y) const override;
  void apply_extended(std::span<const Extended> x, std::span<Extended> y) const override;
  void apply_adjoint_extended(std::span<const Extended> u, std::span<Extended> y) const override;

 private:
  std::vector<OperatorPtr> children_;
};

/// A * diag(scale).
class ColScaledOperator final : public LinearOperator {
 public:
  ColScaledOperator(OperatorPtr inner, Vector scale);

  OperatorKind kind() const noexcept override { return OperatorKind::col_scaled; }
  const Vector& scale() const noexcept { return scale_; }

  void apply_into(std::span<const double> x, std::span<double> y) const override;
  void apply_adjoint_into(std::span<const double> u, std::span<double> y) const override;
  void apply_block_into(const Eigen::Ref<const Matrix>& x, Eigen::Ref<Matrix> y) const override;
  void apply_adjoint_block_into(const Eigen::Ref<const Matrix>& u,
                                Eigen::Ref<Matrix> y) const override;
  void apply_extended(std::span<const Extended> x, std::span<Extended> y) const override;
  void apply_adjoint_extended(std::span<const Extended> u, std::span<Extended> y) const override;

 private:
  OperatorPtr inner_;
  Vector scale_;
};

/// A preconditioned operator: A * F (right) or F^T * A (left) for a dense
/// factor F.
class PrecondComposedOperator final : public LinearOperator {
 public:
  enum class Side { right, left };

  PrecondComposedOperator(OperatorPtr inner, Matrix factor, Side side);

  OperatorKind kind() const noexcept override { return OperatorKind::precond_composed; }
  Side side() const noexcept { return side_; }
  const Matrix& factor() const noexcept { return factor_; }
  const LinearOperator& inner() const noexcept { return *inner_; }

  void apply_into(std::span<const double> x, std::span<double> y) const override;
  void apply_adjoint_into(std::span<const double> u, std::span<double> y) const override;
  void apply_block_into(const Eigen::Ref<const Matrix>& x, Eigen::Ref<Matrix> y) const override;
  void apply_adjoint_block_into(const Eigen::Ref<const Matrix>& u,
                                Eigen::Ref<Matrix> y) const override;
  void apply_extended(std::span<const Extended> x, std::span<Extended> y) const override;
  void apply_adjoint_extended(std::span<const Extended> u, std::span<Extended> y) const override;

 private:
  OperatorPtr inner_;
  Matrix factor_;
  Side side_;
};

/// b - A x and A^T (b - A x), both formed in extended precision and rounded
/// once at the end.
struct AccurateResidual {
  Vector residual;
  Vector normal;
};

AccurateResidual accurate_residual(const LinearOperator& a, const Eigen::Ref<const Vector>& x,
                                   const Eigen::Ref<const Vector>& b);

// Factories.
std::shared_ptr<const DenseOperator> make_dense(RowMatrix a);
std::shared_ptr<const CsrOperator> make_csr(CsrMatrix a);
OperatorPtr make_identity(Index n, double scale = 1.0);
OperatorPtr vstack(std::vector<OperatorPtr> children);
OperatorPtr hcat(std::vector<OperatorPtr> children);
OperatorPtr col_scaled(OperatorPtr inner, Vector scale);
/// A * factor
OperatorPtr compose_right(OperatorPtr a, Matrix factor);
/// factor^T * A
OperatorPtr compose_left(OperatorPtr a, Matrix factor);

}  // namespace lsrn
