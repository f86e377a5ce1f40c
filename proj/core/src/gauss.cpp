#include "lsrn/gauss.hpp"

#include "lsrn/parallel.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace lsrn {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) noexcept {
  std::uint64_t s = a ^ (b * 0xD1B54A32D192ED03ULL);
  return splitmix64(s);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

// Uniform in (0, 1) from the top 53 bits.
double open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

struct ZigguratTables {
  static constexpr int kLayers = 256;
  static constexpr double kR = 3.6541528853610088;       // start of the tail
  static constexpr double kArea = 4.92867323399e-3;      // area of each layer

  std::array<double, kLayers + 1> x{};
  std::array<double, kLayers + 1> f{};

  ZigguratTables() {
    const auto pdf = [](double v) { return std::exp(-0.5 * v * v); };
    x[0] = kArea / pdf(kR);
    x[1] = kR;
    for (int i = 1; i < kLayers - 1; ++i) x[i + 1] = std::sqrt(-2.0 * std::log(kArea / x[i] + pdf(x[i])));
    x[kLayers] = 0.0;
    for (int i = 0; i <= kLayers; ++i) f[i] = pdf(x[i]);
  }
};

const ZigguratTables& tables() {
  static const ZigguratTables t;
  return t;
}

}  // namespace

Xoshiro256::Xoshiro256(std::uint64_t seed) noexcept {
  std::uint64_t s = seed;
  for (auto& word : s_) word = splitmix64(s);
}

Xoshiro256::result_type Xoshiro256::operator()() noexcept {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double ziggurat_normal(Xoshiro256& rng) noexcept {
  const auto& t = tables();
  for (;;) {
    const std::uint64_t bits = rng();
    const auto i = static_cast<int>(bits & 0xFF);
    const double u = 2.0 * open_unit(bits) - 1.0;
    const double x = u * t.x[i];
    if (std::abs(x) < t.x[i + 1]) return x;
    if (i == 0) {
      // Tail beyond R.
      double tail = 0.0;
      double y = 0.0;
      do {
        tail = -std::log(open_unit(rng())) / ZigguratTables::kR;
        y = -std::log(open_unit(rng()));
      } while (y + y < tail * tail);
      return u < 0.0 ? -(ZigguratTables::kR + tail) : ZigguratTables::kR + tail;
    }
    if (t.f[i + 1] + (t.f[i] - t.f[i + 1]) * open_unit(rng()) < std::exp(-0.5 * x * x)) return x;
  }
}

GaussianSource::GaussianSource(std::uint64_t seed, std::size_t block_size)
    : seed_(seed), block_size_(block_size) {
  if (block_size_ == 0) throw Error("gaussian block size must be positive");
}

Xoshiro256 GaussianSource::block_engine(Index row, Index block) const noexcept {
  return Xoshiro256(mix(mix(seed_, static_cast<std::uint64_t>(row)), static_cast<std::uint64_t>(block)));
}

void GaussianSource::fill_row(Index row, Index col_begin, Index col_end, std::span<double> out) const {
  if (col_end < col_begin || out.size() != static_cast<std::size_t>(col_end - col_begin)) {
    throw DimensionError("fill_row: output span does not match the column range");
  }
  const auto bs = static_cast<Index>(block_size_);
  Index col = col_begin;
  std::size_t k = 0;
  while (col < col_end) {
    const Index block = col / bs;
    const Index block_start = block * bs;
    const Index block_stop = std::min(col_end, block_start + bs);
    Xoshiro256 rng = block_engine(row, block);
    // Skip the part of the block before col.
    for (Index c = block_start; c < col; ++c) (void)ziggurat_normal(rng);
    for (; col < block_stop; ++col) out[k++] = ziggurat_normal(rng);
  }
}

void GaussianSource::fill_rows(Index row_begin, Index row_end, Index cols, std::span<double> out) const {
  if (row_end < row_begin || cols < 0 ||
      out.size() != static_cast<std::size_t>((row_end - row_begin) * cols)) {
    throw DimensionError("fill_rows: output span does not match the requested shape");
  }
  const auto ucols = static_cast<std::size_t>(cols);
  parallel_for(static_cast<std::size_t>(row_end - row_begin), [&](std::size_t i) {
    fill_row(row_begin + static_cast<Index>(i), 0, cols, out.subspan(i * ucols, ucols));
  });
}

RowMatrix fill_gaussian(const GaussianSource& source, Index rows, Index cols) {
  if (rows <= 0 || cols <= 0) {
    throw DimensionError("fill_gaussian: dimensions must be positive, got " + std::to_string(rows) +
                         "x" + std::to_string(cols));
  }
  constexpr auto kMaxEntries = static_cast<Index>(std::numeric_limits<std::ptrdiff_t>::max() /
                                                  static_cast<std::ptrdiff_t>(sizeof(double)));
  if (rows > kMaxEntries / cols) {
    throw Error("fill_gaussian: " + std::to_string(rows) + "x" + std::to_string(cols) +
                " exceeds the addressable size");
  }
  RowMatrix g(rows, cols);
  source.fill_rows(0, rows, cols, {g.data(), static_cast<std::size_t>(g.size())});
  return g;
}

}  // namespace lsrn
