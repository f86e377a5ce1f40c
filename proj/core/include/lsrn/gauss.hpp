#pragma once

#include "lsrn/common.hpp"

#include <cstdint>
#include <span>

namespace lsrn {

/// xoshiro256** seeded through SplitMix64.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept;

 private:
  std::uint64_t s_[4];
};

/// Standard normal variate via the 256-layer Ziggurat method (Marsaglia and
/// Tsang). The layer index and the abscissa are taken from disjoint bits of
/// one 64-bit draw.
double ziggurat_normal(Xoshiro256& rng) noexcept;

/// A seekable, reproducible stream of standard normal samples shaped as a
/// row-major matrix. Every row is cut into blocks of `block_size` samples and
/// each block is drawn from its own generator keyed by (seed, row, block). Any
/// row range can therefore be produced independently, and the output does not
/// depend on how rows are distributed over workers.
class GaussianSource {
 public:
  static constexpr std::size_t kDefaultBlockSize = 4096;

  explicit GaussianSource(std::uint64_t seed = 0, std::size_t block_size = kDefaultBlockSize);

  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t block_size() const noexcept { return block_size_; }

  /// Entries [col_begin, col_end) of row `row` in a matrix with `cols` columns
  /// (`cols` only bounds the range; a row prefix never depends on the width).
  void fill_row(Index row, Index col_begin, Index col_end, std::span<double> out) const;

  /// Rows [row_begin, row_end) of a `cols`-wide matrix, row-major into `out`.
  void fill_rows(Index row_begin, Index row_end, Index cols, std::span<double> out) const;

  /// Keyed block generator (exposed for tests of the block layout).
  Xoshiro256 block_engine(Index row, Index block) const noexcept;

 private:
  std::uint64_t seed_;
  std::size_t block_size_;
};

/// rows x cols matrix of i.i.d. standard normal draws. Deterministic in
/// (seed, rows, cols, block size). Throws on a zero dimension or when
/// rows*cols does not fit in memory addressing.
RowMatrix fill_gaussian(const GaussianSource& source, Index rows, Index cols);

}  // namespace lsrn
