#pragma once

#include <cstddef>
#include <functional>

namespace lsrn {

/// Number of workers used by the parallel kernels. Defaults to the hardware
/// concurrency. Results never depend on this value: work is always split into
/// chunks whose boundaries are fixed by the problem size alone.
int num_threads() noexcept;
void set_num_threads(int n);

/// Runs body(i) for i in [0, count). Iterations may run concurrently. Nested
/// calls from inside a running parallel_for execute serially.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// Number of fixed-size chunks needed to cover `extent` items.
constexpr std::size_t chunk_count(std::size_t extent, std::size_t chunk) noexcept {
  return chunk == 0 ? 0 : (extent + chunk - 1) / chunk;
}

}  // namespace lsrn
