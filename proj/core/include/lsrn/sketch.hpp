#pragma once

#include "lsrn/gauss.hpp"
#include "lsrn/linop.hpp"

#include <cstddef>

namespace lsrn {

/// left: G*A with G of size s x m (tall problems).
/// right: A*G with G of size n x s (wide problems). G is drawn as the row-major
/// s x n matrix fill_gaussian(source, s, n) and used transposed.
enum class SketchSide { left, right };

struct SketchOptions {
  /// Rows of G generated and applied per block.
  Index block_rows = 128;
  /// Upper bound on the bytes held by the sketched matrix.
  std::size_t memory_budget = std::size_t{8} << 30;
};

struct SketchResult {
  Matrix a_tilde;  // s x n (left) or m x s (right)
  Index s = 0;
  SketchSide side = SketchSide::left;
  std::uint64_t seed = 0;
  double elapsed = 0.0;
  // Split of `elapsed` into sample generation and multiplication.
  double randn_seconds = 0.0;
  double mult_seconds = 0.0;
};

/// ceil(gamma * k). Throws when gamma <= 1.
Index sample_count(double gamma, Index k);

/// Sketches A without ever materializing all of G.
SketchResult sketch(const LinearOperator& a, double gamma, SketchSide side,
                    const GaussianSource& source, const SketchOptions& options = {});

/// Same as sketch() but with an explicit sample count s (> min(m, n) is not
/// required here; callers that need it check it).
SketchResult sketch_with_samples(const LinearOperator& a, Index s, SketchSide side,
                                 const GaussianSource& source, const SketchOptions& options = {});

}  // namespace lsrn
