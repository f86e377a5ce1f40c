#include "lsrn/linop.hpp"

#include "lsrn/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace lsrn {
namespace {

constexpr Index kRowChunk = 256;
constexpr Index kColChunk = 256;
constexpr Index kBlockColChunk = 8;

using ConstMap = Eigen::Map<const Vector>;
using MutMap = Eigen::Map<Vector>;

ConstMap view(std::span<const double> s) { return ConstMap(s.data(), static_cast<Index>(s.size())); }
MutMap view(std::span<double> s) { return MutMap(s.data(), static_cast<Index>(s.size())); }

std::span<double> span_of(Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

void check_length(const char* what, Index expected, Index actual) {
  if (expected != actual) {
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(expected) +
                         ", got " + std::to_string(actual));
  }
}

template <typename Derived>
void check_finite(const char* what, const Eigen::DenseBase<Derived>& v) {
  if (!v.allFinite()) throw NonFiniteError(std::string(what) + ": input contains NaN or infinity");
}

using ExtVec = std::vector<Extended>;

std::span<Extended> span_of(ExtVec& v) { return {v.data(), v.size()}; }

// y = F x or y = F^T x for a dense column-major factor, in extended precision.
void factor_extended(const Matrix& f, bool transpose, std::span<const Extended> x,
                     std::span<Extended> y) {
  if (!transpose) {
    std::fill(y.begin(), y.end(), Extended{0});
    for (Index j = 0; j < f.cols(); ++j) {
      const Extended xj = x[j];
      const double* col = f.col(j).data();
      for (Index i = 0; i < f.rows(); ++i) y[i] += static_cast<Extended>(col[i]) * xj;
    }
  } else {
    for (Index j = 0; j < f.cols(); ++j) {
      const double* col = f.col(j).data();
      Extended acc = 0;
      for (Index i = 0; i < f.rows(); ++i) acc += static_cast<Extended>(col[i]) * x[i];
      y[j] = acc;
    }
  }
}

// Number of row partitions used by the CSR transposed product. Depends only on
// the matrix shape, so the summation order is independent of the worker count.
Index csr_adjoint_partitions(const CsrMatrix& a) {
  constexpr Index kMaxPartitions = 32;
  constexpr Index kNnzPerPartition = Index{1} << 16;
  constexpr Index kScratchBudget = Index{1} << 23;  // doubles
  Index parts = std::max<Index>(1, (a.nnz() + kNnzPerPartition - 1) / kNnzPerPartition);
  parts = std::min(parts, kMaxPartitions);
  parts = std::min(parts, std::max<Index>(1, kScratchBudget / std::max<Index>(1, a.cols)));
  parts = std::min(parts, std::max<Index>(1, a.rows));
  return parts;
}

}  // namespace

std::string_view to_string(OperatorKind kind) noexcept {
  switch (kind) {
    case OperatorKind::dense: return "dense";
    case OperatorKind::csr: return "csr";
    case OperatorKind::vstack: return "vstack";
    case OperatorKind::hcat: return "hcat";
    case OperatorKind::col_scaled: return "col-scaled";
    case OperatorKind::precond_composed: return "precond-composed";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// CsrMatrix

void CsrMatrix::validate() const {
  if (rows < 0 || cols < 0) throw DimensionError("csr: negative dimension");
  if (static_cast<Index>(row_ptr.size()) != rows + 1) {
    throw DimensionError("csr: row pointer has " + std::to_string(row_ptr.size()) +
                         " entries, expected " + std::to_string(rows + 1));
  }
  if (col_idx.size() != values.size()) {
    throw DimensionError("csr: " + std::to_string(col_idx.size()) + " column indices but " +
                         std::to_string(values.size()) + " values");
  }
  if (row_ptr.front() != 0) throw DimensionError("csr: row pointer must start at 0");
  for (Index i = 0; i < rows; ++i) {
    if (row_ptr[i + 1] < row_ptr[i]) {
      throw DimensionError("csr: row pointer decreases at row " + std::to_string(i));
    }
  }
  if (row_ptr.back() != nnz()) {
    throw DimensionError("csr: final row pointer " + std::to_string(row_ptr.back()) +
                         " does not equal nnz " + std::to_string(nnz()));
  }
  for (std::size_t k = 0; k < col_idx.size(); ++k) {
    if (col_idx[k] < 0 || col_idx[k] >= cols) {
      throw DimensionError("csr: column index " + std::to_string(col_idx[k]) +
                           " out of range [0, " + std::to_string(cols) + ")");
    }
  }
}

CsrMatrix CsrMatrix::from_dense(const Eigen::Ref<const Matrix>& a, double drop_tol) {
  CsrMatrix out;
  out.rows = a.rows();
  out.cols = a.cols();
  out.row_ptr.reserve(static_cast<std::size_t>(a.rows()) + 1);
  out.row_ptr.push_back(0);
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      const double v = a(i, j);
      if (std::abs(v) > drop_tol) {
        out.col_idx.push_back(j);
        out.values.push_back(v);
      }
    }
    out.row_ptr.push_back(static_cast<Index>(out.values.size()));
  }
  return out;
}

CsrMatrix CsrMatrix::diagonal(const Vector& d) {
  CsrMatrix out;
  out.rows = out.cols = d.size();
  out.row_ptr.resize(static_cast<std::size_t>(d.size()) + 1);
  out.col_idx.resize(static_cast<std::size_t>(d.size()));
  out.values.resize(static_cast<std::size_t>(d.size()));
  for (Index i = 0; i < d.size(); ++i) {
    out.row_ptr[i] = i;
    out.col_idx[i] = i;
    out.values[i] = d[i];
  }
  out.row_ptr[d.size()] = d.size();
  return out;
}

RowMatrix CsrMatrix::to_dense() const {
  RowMatrix out = RowMatrix::Zero(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index k = row_ptr[i]; k < row_ptr[i + 1]; ++k) out(i, col_idx[k]) += values[k];
  }
  return out;
}

// ---------------------------------------------------------------------------
// LinearOperator

LinearOperator::LinearOperator(Index rows, Index cols) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw DimensionError("operator dimensions must be nonnegative");
}

Vector LinearOperator::apply(const Eigen::Ref<const Vector>& x) const {
  check_length("apply", cols_, x.size());
  check_finite("apply", x);
  Vector y(rows_);
  apply_into({x.data(), static_cast<std::size_t>(x.size())}, span_of(y));
  return y;
}

Vector LinearOperator::apply_adjoint(const Eigen::Ref<const Vector>& u) const {
  check_length("apply_adjoint", rows_, u.size());
  check_finite("apply_adjoint", u);
  Vector y(cols_);
  apply_adjoint_into({u.data(), static_cast<std::size_t>(u.size())}, span_of(y));
  return y;
}

Matrix LinearOperator::apply_block(const Eigen::Ref<const Matrix>& x) const {
  if (x.rows() != cols_) {
    throw DimensionError("apply_block: expected " + std::to_string(cols_) + " rows, got " +
                         std::to_string(x.rows()));
  }
  check_finite("apply_block", x);
  Matrix y(rows_, x.cols());
  apply_block_into(x, y);
  return y;
}

Matrix LinearOperator::apply_adjoint_block(const Eigen::Ref<const Matrix>& u) const {
  if (u.rows() != rows_) {
    throw DimensionError("apply_adjoint_block: expected " + std::to_string(rows_) +
                         " rows, got " + std::to_string(u.rows()));
  }
  check_finite("apply_adjoint_block", u);
  Matrix y(cols_, u.cols());
  apply_adjoint_block_into(u, y);
  return y;
}

Matrix LinearOperator::to_dense() const { return apply_block(Matrix::Identity(cols_, cols_)); }

void LinearOperator::apply_block_into(const Eigen::Ref<const Matrix>& x,
                                      Eigen::Ref<Matrix> y) const {
  parallel_for(static_cast<std::size_t>(x.cols()), [&](std::size_t c) {
    const Index j = static_cast<Index>(c);
    Vector xj = x.col(j);
    Vector yj(rows_);
    apply_into(span_of(xj), span_of(yj));
    y.col(j) = yj;
  });
}

void LinearOperator::apply_adjoint_block_into(const Eigen::Ref<const Matrix>& u,
                                              Eigen::Ref<Matrix> y) const {
  parallel_for(static_cast<std::size_t>(u.cols()), [&](std::size_t c) {
    const Index j = static_cast<Index>(c);
    Vector uj = u.col(j);
    Vector yj(cols_);
    apply_adjoint_into(span_of(uj), span_of(yj));
    y.col(j) = yj;
  });
}

// ---------------------------------------------------------------------------
// DenseOperator

DenseOperator::DenseOperator(RowMatrix a) : LinearOperator(a.rows(), a.cols()), a_(std::move(a)) {}

void DenseOperator::apply_into(std::span<const double> x, std::span<double> y) const {
  const auto xv = view(x);
  auto yv = view(y);
  parallel_for(chunk_count(rows(), kRowChunk), [&](std::size_t c) {
    const Index r0 = static_cast<Index>(c) * kRowChunk;
    const Index len = std::min(kRowChunk, rows() - r0);
    yv.segment(r0, len).noalias() = a_.middleRows(r0, len) * xv;
  });
}

void DenseOperator::apply_adjoint_into(std::span<const double> u, std::span<double> y) const {
  const auto uv = view(u);
  auto yv = view(y);
  parallel_for(chunk_count(cols(), kColChunk), [&](std::size_t c) {
    const Index c0 = static_cast<Index>(c) * kColChunk;
    const Index len = std::min(kColChunk, cols() - c0);
    yv.segment(c0, len).noalias() = a_.middleCols(c0, len).transpose() * uv;
  });
}

void DenseOperator::apply_block_into(const Eigen::Ref<const Matrix>& x,
                                     Eigen::Ref<Matrix> y) const {
  parallel_for(chunk_count(rows(), kRowChunk), [&](std::size_t c) {
    const Index r0 = static_cast<Index>(c) * kRowChunk;
    const Index len = std::min(kRowChunk, rows() - r0);
    y.middleRows(r0, len).noalias() = a_.middleRows(r0, len) * x;
  });
}

void DenseOperator::apply_adjoint_block_into(const Eigen::Ref<const Matrix>& u,
                                             Eigen::Ref<Matrix> y) const {
  parallel_for(chunk_count(cols(), kColChunk), [&](std::size_t c) {
    const Index c0 = static_cast<Index>(c) * kColChunk;
    const Index len = std::min(kColChunk, cols() - c0);
    y.middleRows(c0, len).noalias() = a_.middleCols(c0, len).transpose() * u;
  });
}

void DenseOperator::apply_extended(std::span<const Extended> x, std::span<Extended> y) const {
  parallel_for(chunk_count(rows(), kRowChunk), [&](std::size_t c) {
    const Index r0 = static_cast<Index>(c) * kRowChunk;
    const Index r1 = std::min(rows(), r0 + kRowChunk);
    for (Index i = r0; i < r1; ++i) {
      const double* row = a_.row(i).data();
      Extended acc = 0;
      for (Index j = 0; j < cols(); ++j) acc += static_cast<Extended>(row[j]) * x[j];
      y[i] = acc;
    }
  });
}

void DenseOperator::apply_adjoint_extended(std::span<const Extended> u, std::span<Extended> y) const {
  parallel_for(chunk_count(cols(), kColChunk), [&](std::size_t c) {
    const Index c0 = static_cast<Index>(c) * kColChunk;
    const Index c1 = std::min(cols(), c0 + kColChunk);
    std::fill(y.begin() + c0, y.begin() + c1, Extended{0});
    for (Index i = 0; i < rows(); ++i) {
      const double* row = a_.row(i).data();
      const Extended ui = u[i];
      for (Index j = c0; j < c1; ++j) y[j] += static_cast<Extended>(row[j]) * ui;
    }
  });
}

// ---------------------------------------------------------------------------
// CsrOperator

CsrOperator::CsrOperator(CsrMatrix a) : LinearOperator(a.rows, a.cols), a_(std::move(a)) {
  a_.validate();
}

void CsrOperator::apply_into(std::span<const double> x, std::span<double> y) const {
  parallel_for(chunk_count(rows(), kRowChunk * 4), [&](std::size_t c) {
    const Index r0 = static_cast<Index>(c) * kRowChunk * 4;
    const Index r1 = std::min(rows(), r0 + kRowChunk * 4);
    for (Index i = r0; i < r1; ++i) {
      double acc = 0.0;
      for (Index k = a_.row_ptr[i]; k < a_.row_ptr[i + 1]; ++k) acc += a_.values[k] * x[a_.col_idx[k]];
      y[i] = acc;
    }
  });
}

void CsrOperator::adjoint_rows(Index row_begin, Index row_end, std::span<const double> u,
                               std::span<double> y) const {
  std::fill(y.begin(), y.end(), 0.0);
  for (Index i = row_begin; i < row_end; ++i) {
    const double ui = u[i];
    if (ui == 0.0) continue;
    for (Index k = a_.row_ptr[i]; k < a_.row_ptr[i + 1]; ++k) y[a_.col_idx[k]] += a_.values[k] * ui;
  }
}

void CsrOperator::apply_adjoint_into(std::span<const double> u, std::span<double> y) const {
  const Index parts = csr_adjoint_partitions(a_);
  if (parts == 1) {
    adjoint_rows(0, rows(), u, y);
    return;
  }
  const Index rows_per_part = (rows() + parts - 1) / parts;
  const Index n = cols();
  std::vector<double> scratch(static_cast<std::size_t>(parts * n));
  parallel_for(static_cast<std::size_t>(parts), [&](std::size_t p) {
    const Index r0 = static_cast<Index>(p) * rows_per_part;
    const Index r1 = std::min(rows(), r0 + rows_per_part);
    adjoint_rows(r0, std::max(r0, r1), u, std::span<double>(scratch).subspan(p * n, n));
  });
  // Reduce partitions in a fixed order, parallel over output columns.
  parallel_for(chunk_count(n, kColChunk * 16), [&](std::size_t c) {
    const Index j0 = static_cast<Index>(c) * kColChunk * 16;
    const Index j1 = std::min(n, j0 + kColChunk * 16);
    for (Index j = j0; j < j1; ++j) {
      double acc = scratch[j];
      for (Index p = 1; p < parts; ++p) acc += scratch[p * n + j];
      y[j] = acc;
    }
  });
}

void CsrOperator::apply_block_into(const Eigen::Ref<const Matrix>& x,
                                   Eigen::Ref<Matrix> y) const {
  parallel_for(chunk_count(rows(), kRowChunk), [&](std::size_t c) {
    const Index r0 = static_cast<Index>(c) * kRowChunk;
    const Index r1 = std::min(rows(), r0 + kRowChunk);
    for (Index i = r0; i < r1; ++i) {
      y.row(i).setZero();
      for (Index k = a_.row_ptr[i]; k < a_.row_ptr[i + 1]; ++k) {
        y.row(i) += a_.values[k] * x.row(a_.col_idx[k]);
      }
    }
  });
}

void CsrOperator::apply_adjoint_block_into(const Eigen::Ref<const Matrix>& u,
                                           Eigen::Ref<Matrix> y) const {
  const Index k = u.cols();
  parallel_for(chunk_count(k, kBlockColChunk), [&](std::size_t c) {
    const Index c0 = static_cast<Index>(c) * kBlockColChunk;
    const Index len = std::min(kBlockColChunk, k - c0);
    auto yb = y.middleCols(c0, len);
    yb.setZero();
    for (Index i = 0; i < rows(); ++i) {
      const auto ui = u.row(i).segment(c0, len);
      for (Index p = a_.row_ptr[i]; p < a_.row_ptr[i + 1]; ++p) {
        yb.row(a_.col_idx[p]) += a_.values[p] * ui;
      }
    }
  });
}

void CsrOperator::apply_extended(std::span<const Extended> x, std::span<Extended> y) const {
  parallel_for(chunk_count(rows(), kRowChunk * 4), [&](std::size_t c) {
    const Index r0 = static_cast<Index>(c) * kRowChunk * 4;
    const Index r1 = std::min(rows(), r0 + kRowChunk * 4);
    for (Index i = r0; i < r1; ++i) {
      Extended acc = 0;
      for (Index k = a_.row_ptr[i]; k < a_.row_ptr[i + 1]; ++k) {
        acc += static_cast<Extended>(a_.values[k]) * x[a_.col_idx[k]];
      }
      y[i] = acc;
    }
  });
}

void CsrOperator::apply_adjoint_extended(std::span<const Extended> u, std::span<Extended> y) const {
  std::fill(y.begin(), y.end(), Extended{0});
  for (Index i = 0; i < rows(); ++i) {
    const Extended ui = u[i];
    for (Index k = a_.row_ptr[i]; k < a_.row_ptr[i + 1]; ++k) {
      y[a_.col_idx[k]] += static_cast<Extended>(a_.values[k]) * ui;
    }
  }
}

// ---------------------------------------------------------------------------
// VStackOperator

namespace {

Index sum_rows(const std::vector<OperatorPtr>& children) {
  Index total = 0;
  for (const auto& c : children) total += c->rows();
  return total;
}

Index sum_cols(const std::vector<OperatorPtr>& children) {
  Index total = 0;
  for (const auto& c : children) total += c->cols();
  return total;
}

const std::vector<OperatorPtr>& require_children(const char* what, const std::vector<OperatorPtr>& children) {
  if (children.empty()) throw DimensionError(std::string(what) + ": no operands");
  for (const auto& c : children) {
    if (!c) throw Error(std::string(what) + ": null operand");
  }
  return children;
}

}  // namespace

VStackOperator::VStackOperator(std::vector<OperatorPtr> children)
    : LinearOperator(sum_rows(require_children("vstack", children)),
                     require_children("vstack", children).front()->cols()),
      children_(std::move(children)) {
  for (const auto& c : children_) {
    if (c->cols() != cols()) {
      throw DimensionError("vstack: operand has " + std::to_string(c->cols()) +
                           " columns, expected " + std::to_string(cols()));
    }
  }
}

void VStackOperator::apply_into(std::span<const double> x, std::span<double> y) const {
  std::size_t offset = 0;
  for (const auto& c : children_) {
    const auto len = static_cast<std::size_t>(c->rows());
    c->apply_into(x, y.subspan(offset, len));
    offset += len;
  }
}

void VStackOperator::apply_adjoint_into(std::span<const double> u, std::span<double> y) const {
  std::size_t offset = 0;
  Vector tmp(cols());
  auto yv = view(y);
  for (std::size_t i = 0; i < children_.size(); ++i) {
    const auto& c = children_[i];
    const auto len = static_cast<std::size_t>(c->rows());
    if (i == 0) {
      c->apply_adjoint_into(u.subspan(offset, len), y);
    } else {
      c->apply_adjoint_into(u.subspan(offset, len), span_of(tmp));
      yv += tmp;
    }
    offset += len;
  }
}

void VStackOperator::apply_block_into(const Eigen::Ref<const Matrix>& x,
                                      Eigen::Ref<Matrix> y) const {
  Index offset = 0;
  for (const auto& c : children_) {
    c->apply_block_into(x, y.middleRows(offset, c->rows()));
    offset += c->rows();
  }
}

void VStackOperator::apply_adjoint_block_into(const Eigen::Ref<const Matrix>& u,
                                              Eigen::Ref<Matrix> y) const {
  Index offset = 0;
  Matrix tmp(cols(), u.cols());
  for (std::size_t i = 0; i < children_.size(); ++i) {
    const auto& c = children_[i];
    if (i == 0) {
      c->apply_adjoint_block_into(u.middleRows(offset, c->rows()), y);
    } else {
      c->apply_adjoint_block_into(u.middleRows(offset, c->rows()), tmp);
      y += tmp;
    }
    offset += c->rows();
  }
}

void VStackOperator::apply_extended(std::span<const Extended> x, std::span<Extended> y) const {
  std::size_t offset = 0;
  for (const auto& c : children_) {
    const auto len = static_cast<std::size_t>(c->rows());
    c->apply_extended(x, y.subspan(offset, len));
    offset += len;
  }
}

void VStackOperator::apply_adjoint_extended(std::span<const Extended> u, std::span<Extended> y) const {
  std::size_t offset = 0;
  ExtVec tmp(static_cast<std::size_t>(cols()));
  for (std::size_t i = 0; i < children_.size(); ++i) {
    const auto& c = children_[i];
    const auto len = static_cast<std::size_t>(c->rows());
    if (i == 0) {
      c->apply_adjoint_extended(u.subspan(offset, len), y);
    } else {
      c->apply_adjoint_extended(u.subspan(offset, len), span_of(tmp));
      for (std::size_t j = 0; j < y.size(); ++j) y[j] += tmp[j];
    }
    offset += len;
  }
}

// ---------------------------------------------------------------------------
// HCatOperator

HCatOperator::HCatOperator(std::vector<OperatorPtr> children)
    : LinearOperator(require_children("hcat", children).front()->rows(),
                     sum_cols(require_children("hcat", children))),
      children_(std::move(children)) {
  for (const auto& c : children_) {
    if (c->rows() != rows()) {
      throw DimensionError("hcat: operand has " + std::to_string(c->rows()) +
                           " rows, expected " + std::to_string(rows()));
    }
  }
}

void HCatOperator::apply_into(std::span<const double> x, std::span<double> y) const {
  std::size_t offset = 0;
  Vector tmp(rows());
  auto yv = view(y);
  for (std::size_t i = 0; i < children_.size(); ++i) {
    const auto& c = children_[i];
    const auto len = static_cast<std::size_t>(c->cols());
    if (i == 0) {
      c->apply_into(x.subspan(offset, len), y);
    } else {
      c->apply_into(x.subspan(offset, len), span_of(tmp));
      yv += tmp;
    }
    offset += len;
  }
}

void HCatOperator::apply_adjoint_into(std::span<const double> u, std::span<double> y) const {
  std::size_t offset = 0;
  for (const auto& c : children_) {
    const auto len = static_cast<std::size_t>(c->cols());
    c->apply_adjoint_into(u, y.subspan(offset, len));
    offset += len;
  }
}

void HCatOperator::apply_block_into(const Eigen::Ref<const Matrix>& x,
                                    Eigen::Ref<Matrix> y) const {
  Index offset = 0;
  Matrix tmp(rows(), x.cols());
  for (std::size_t i = 0; i < children_.size(); ++i) {
    const auto& c = children_[i];
    if (i == 0) {
      c->apply_block_into(x.middleRows(offset, c->cols()), y);
    } else {
      c->apply_block_into(x.middleRows(offset, c->cols()), tmp);
      y += tmp;
    }
    offset += c->cols();
  }
}

void HCatOperator::apply_adjoint_block_into(const Eigen::Ref<const Matrix>& u,
                                            Eigen::Ref<Matrix> y) const {
  Index offset = 0;
  for (const auto& c : children_) {
    c->apply_adjoint_block_into(u, y.middleRows(offset, c->cols()));
    offset += c->cols();
  }
}

void HCatOperator::apply_extended(std::span<const Extended> x, std::span<Extended> y) const {
  std::size_t offset = 0;
  ExtVec tmp(static_cast<std::size_t>(rows()));
  for (std::size_t i = 0; i < children_.size(); ++i) {
    const auto& c = children_[i];
    const auto len = static_cast<std::size_t>(c->cols());
    if (i == 0) {
      c->apply_extended(x.subspan(offset, len), y);
    } else {
      c->apply_extended(x.subspan(offset, len), span_of(tmp));
      for (std::size_t j = 0; j < y.size(); ++j) y[j] += tmp[j];
    }
    offset += len;
  }
}

void HCatOperator::apply_adjoint_extended(std::span<const Extended> u, std::span<Extended> y) const {
  std::size_t offset = 0;
  for (const auto& c : children_) {
    const auto len = static_cast<std::size_t>(c->cols());
    c->apply_adjoint_extended(u, y.subspan(offset, len));
    offset += len;
  }
}

// ---------------------------------------------------------------------------
// ColScaledOperator

ColScaledOperator::ColScaledOperator(OperatorPtr inner, Vector scale)
    : LinearOperator(inner ? inner->rows() : 0, inner ? inner->cols() : 0),
      inner_(std::move(inner)),
      scale_(std::move(scale)) {
  if (!inner_) throw Error("col_scaled: null operand");
  check_length("col_scaled scale", cols(), scale_.size());
  check_finite("col_scaled scale", scale_);
}

void ColScaledOperator::apply_into(std::span<const double> x, std::span<double> y) const {
  Vector scaled = view(x).cwiseProduct(scale_);
  inner_->apply_into(span_of(scaled), y);
}

void ColScaledOperator::apply_adjoint_into(std::span<const double> u, std::span<double> y) const {
  inner_->apply_adjoint_into(u, y);
  view(y).array() *= scale_.array();
}

void ColScaledOperator::apply_block_into(const Eigen::Ref<const Matrix>& x,
                                         Eigen::Ref<Matrix> y) const {
  Matrix scaled = scale_.asDiagonal() * x;
  inner_->apply_block_into(scaled, y);
}

void ColScaledOperator::apply_adjoint_block_into(const Eigen::Ref<const Matrix>& u,
                                                 Eigen::Ref<Matrix> y) const {
  inner_->apply_adjoint_block_into(u, y);
  y = scale_.asDiagonal() * y;
}

void ColScaledOperator::apply_extended(std::span<const Extended> x, std::span<Extended> y) const {
  ExtVec scaled(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) scaled[j] = x[j] * static_cast<Extended>(scale_[j]);
  inner_->apply_extended(scaled, y);
}

void ColScaledOperator::apply_adjoint_extended(std::span<const Extended> u, std::span<Extended> y) const {
  inner_->apply_adjoint_extended(u, y);
  for (std::size_t j = 0; j < y.size(); ++j) y[j] *= static_cast<Extended>(scale_[j]);
}

// ---------------------------------------------------------------------------
// PrecondComposedOperator

namespace {

Index composed_rows(const OperatorPtr& a, const Matrix& f, PrecondComposedOperator::Side side) {
  if (!a) throw Error("compose: null operand");
  return side == PrecondComposedOperator::Side::right ? a->rows() : f.cols();
}

Index composed_cols(const OperatorPtr& a, const Matrix& f, PrecondComposedOperator::Side side) {
  return side == PrecondComposedOperator::Side::right ? f.cols() : a->cols();
}

}  // namespace

PrecondComposedOperator::PrecondComposedOperator(OperatorPtr inner, Matrix factor, Side side)
    : LinearOperator(composed_rows(inner, factor, side), composed_cols(inner, factor, side)),
      inner_(std::move(inner)),
      factor_(std::move(factor)),
      side_(side) {
  const Index expected = side_ == Side::right ? inner_->cols() : inner_->rows();
  if (factor_.rows() != expected) {
    throw DimensionError("compose: factor has " + std::to_string(factor_.rows()) +
                         " rows, expected " + std::to_string(expected));
  }
  check_finite("compose factor", factor_);
}

void PrecondComposedOperator::apply_into(std::span<const double> x, std::span<double> y) const {
  if (side_ == Side::right) {
    Vector t = factor_ * view(x);
    inner_->apply_into(span_of(t), y);
  } else {
    Vector t(inner_->rows());
    inner_->apply_into(x, span_of(t));
    view(y).noalias() = factor_.transpose() * t;
  }
}

void PrecondComposedOperator::apply_adjoint_into(std::span<const double> u,
                                                 std::span<double> y) const {
  if (side_ == Side::right) {
    Vector t(inner_->cols());
    inner_->apply_adjoint_into(u, span_of(t));
    view(y).noalias() = factor_.transpose() * t;
  } else {
    Vector t = factor_ * view(u);
    inner_->apply_adjoint_into(span_of(t), y);
  }
}

void PrecondComposedOperator::apply_block_into(const Eigen::Ref<const Matrix>& x,
                                               Eigen::Ref<Matrix> y) const {
  if (side_ == Side::right) {
    Matrix t = factor_ * x;
    inner_->apply_block_into(t, y);
  } else {
    Matrix t(inner_->rows(), x.cols());
    inner_->apply_block_into(x, t);
    y.noalias() = factor_.transpose() * t;
  }
}

void PrecondComposedOperator::apply_adjoint_block_into(const Eigen::Ref<const Matrix>& u,
                                                       Eigen::Ref<Matrix> y) const {
  if (side_ == Side::right) {
    Matrix t(inner_->cols(), u.cols());
    inner_->apply_adjoint_block_into(u, t);
    y.noalias() = factor_.transpose() * t;
  } else {
    Matrix t = factor_ * u;
    inner_->apply_adjoint_block_into(t, y);
  }
}

void PrecondComposedOperator::apply_extended(std::span<const Extended> x, std::span<Extended> y) const {
  if (side_ == Side::right) {
    ExtVec t(static_cast<std::size_t>(inner_->cols()));
    factor_extended(factor_, false, x, span_of(t));
    inner_->apply_extended(t, y);
  } else {
    ExtVec t(static_cast<std::size_t>(inner_->rows()));
    inner_->apply_extended(x, span_of(t));
    factor_extended(factor_, true, t, y);
  }
}

void PrecondComposedOperator::apply_adjoint_extended(std::span<const Extended> u,
                                                     std::span<Extended> y) const {
  if (side_ == Side::right) {
    ExtVec t(static_cast<std::size_t>(inner_->cols()));
    inner_->apply_adjoint_extended(u, span_of(t));
    factor_extended(factor_, true, t, y);
  } else {
    ExtVec t(static_cast<std::size_t>(inner_->rows()));
    factor_extended(factor_, false, u, span_of(t));
    inner_->apply_adjoint_extended(t, y);
  }
}

// ---------------------------------------------------------------------------

AccurateResidual accurate_residual(const LinearOperator& a, const Eigen::Ref<const Vector>& x,
                                   const Eigen::Ref<const Vector>& b) {
  check_length("accurate_residual x", a.cols(), x.size());
  check_length("accurate_residual b", a.rows(), b.size());
  ExtVec xe(x.data(), x.data() + x.size());
  ExtVec r(static_cast<std::size_t>(a.rows()));
  a.apply_extended(xe, span_of(r));
  for (Index i = 0; i < b.size(); ++i) r[i] = static_cast<Extended>(b[i]) - r[i];
  ExtVec q(static_cast<std::size_t>(a.cols()));
  a.apply_adjoint_extended(r, span_of(q));

  AccurateResidual out{Vector(a.rows()), Vector(a.cols())};
  for (Index i = 0; i < a.rows(); ++i) out.residual[i] = static_cast<double>(r[i]);
  for (Index j = 0; j < a.cols(); ++j) out.normal[j] = static_cast<double>(q[j]);
  return out;
}

// ---------------------------------------------------------------------------
// Factories

std::shared_ptr<const DenseOperator> make_dense(RowMatrix a) {
  return std::make_shared<const DenseOperator>(std::move(a));
}

std::shared_ptr<const CsrOperator> make_csr(CsrMatrix a) {
  return std::make_shared<const CsrOperator>(std::move(a));
}

OperatorPtr make_identity(Index n, double scale) {
  return make_csr(CsrMatrix::diagonal(Vector::Constant(n, scale)));
}

OperatorPtr vstack(std::vector<OperatorPtr> children) {
  return std::make_shared<const VStackOperator>(std::move(children));
}

OperatorPtr hcat(std::vector<OperatorPtr> children) {
  return std::make_shared<const HCatOperator>(std::move(children));
}

OperatorPtr col_scaled(OperatorPtr inner, Vector scale) {
  return std::make_shared<const ColScaledOperator>(std::move(inner), std::move(scale));
}

OperatorPtr compose_right(OperatorPtr a, Matrix factor) {
  return std::make_shared<const PrecondComposedOperator>(std::move(a), std::move(factor),
                                                         PrecondComposedOperator::Side::right);
}

OperatorPtr compose_left(OperatorPtr a, Matrix factor) {
  return std::make_shared<const PrecondComposedOperator>(std::move(a), std::move(factor),
                                                         PrecondComposedOperator::Side::left);
}

}  // namespace lsrn
