#include "lsrn/sketch.hpp"

#include "lsrn/diagnostics.hpp"
#include "lsrn/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <mutex>
#include <string>

namespace lsrn {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

Index sample_count(double gamma, Index k) {
  if (!(gamma > 1.0) || !std::isfinite(gamma)) {
    throw Error("oversampling factor must exceed 1 (got " + std::to_string(gamma) + ")");
  }
  return static_cast<Index>(std::ceil(gamma * static_cast<double>(k)));
}

SketchResult sketch(const LinearOperator& a, double gamma, SketchSide side,
                    const GaussianSource& source, const SketchOptions& options) {
  const Index k = side == SketchSide::left ? a.cols() : a.rows();
  return sketch_with_samples(a, sample_count(gamma, k), side, source, options);
}

SketchResult sketch_with_samples(const LinearOperator& a, Index s, SketchSide side,
                                 const GaussianSource& source, const SketchOptions& options) {
  if (s <= 0) throw Error("sketch: sample count must be positive");
  if (options.block_rows <= 0) throw Error("sketch: block_rows must be positive");
  const Index m = a.rows();
  const Index n = a.cols();
  // Length of one row of G (left) or of G^T (right), and the kept dimension.
  const Index g_width = side == SketchSide::left ? m : n;
  const Index kept = side == SketchSide::left ? n : m;
  if (g_width <= 0 || kept <= 0) throw DimensionError("sketch: operator has a zero dimension");
  if (side == SketchSide::left && s > m) {
    warn("sketch size " + std::to_string(s) + " exceeds row count " + std::to_string(m) +
         "; the problem is not strongly over-determined");
  }
  if (side == SketchSide::right && s > n) {
    warn("sketch size " + std::to_string(s) + " exceeds column count " + std::to_string(n) +
         "; the problem is not strongly under-determined");
  }
  const double bytes = static_cast<double>(s) * static_cast<double>(kept) * sizeof(double);
  if (bytes > static_cast<double>(options.memory_budget)) {
    throw Error("sketch: " + std::to_string(s) + "x" + std::to_string(kept) + " result needs " +
                std::to_string(bytes / (1 << 20)) + " MiB, over the budget of " +
                std::to_string(options.memory_budget >> 20) + " MiB");
  }

  SketchResult out;
  out.s = s;
  out.side = side;
  out.seed = source.seed();
  out.a_tilde.resize(side == SketchSide::left ? s : m, side == SketchSide::left ? n : s);

  const Index block = options.block_rows;
  double randn_cpu = 0.0;
  double mult_cpu = 0.0;
  std::mutex timing_mutex;

  const auto t0 = Clock::now();
  parallel_for(chunk_count(s, block), [&](std::size_t c) {
    const Index r0 = static_cast<Index>(c) * block;
    const Index len = std::min(block, s - r0);

    auto tb = Clock::now();
    RowMatrix g(len, g_width);
    source.fill_rows(r0, r0 + len, g_width, {g.data(), static_cast<std::size_t>(g.size())});
    const double t_randn = seconds_since(tb);

    tb = Clock::now();
    // g^T viewed column-major: g_width x len, one column per row of the block.
    Eigen::Map<const Matrix> gt(g.data(), g_width, len);
    if (side == SketchSide::left) {
      // (G_blk A)^T = A^T G_blk^T
      Matrix part(n, len);
      a.apply_adjoint_block_into(gt, part);
      out.a_tilde.middleRows(r0, len) = part.transpose();
    } else {
      // A G[:, r0:r0+len] = A (G^T_blk)^T
      a.apply_block_into(gt, out.a_tilde.middleCols(r0, len));
    }
    const double t_mult = seconds_since(tb);

    std::lock_guard lock(timing_mutex);
    randn_cpu += t_randn;
    mult_cpu += t_mult;
  });
  out.elapsed = seconds_since(t0);
  const double busy = randn_cpu + mult_cpu;
  const double randn_share = busy > 0.0 ? randn_cpu / busy : 0.5;
  out.randn_seconds = out.elapsed * randn_share;
  out.mult_seconds = out.elapsed - out.randn_seconds;
  return out;
}

}  // namespace lsrn
