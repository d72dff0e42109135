#pragma once

#include <cstddef>
#include <functional>

namespace ntile {

/// Worker count: hardware concurrency, capped by TILE_THREADS when set.
unsigned worker_count();

/// Runs body(i) for i in [0, n) on worker_count() threads. Work is split into
/// contiguous chunks; callers write results by index, so reductions done
/// afterwards in index order are deterministic. The first exception thrown by
/// any worker is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace ntile
