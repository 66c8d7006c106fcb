// parallel.hpp: bounded fan-out over independent tasks.

#pragma once

#include <cstddef>
#include <functional>

namespace qmap {

/// Worker cap: QMAP_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
unsigned worker_count();

/// Calls fn(0) … fn(n-1), each exactly once, on up to worker_count()
/// threads. The first exception thrown by any task is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace qmap
