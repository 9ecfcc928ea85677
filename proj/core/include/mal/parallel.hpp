#pragma once

// Minimal fork-join helper. Work is split into contiguous blocks; each index
// is handled by exactly one worker, so results written per index do not
// depend on the thread count.

#include <cstddef>
#include <functional>

namespace mal {

/// Worker count: MAL_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
int worker_count();

/// Calls body(begin, end) on disjoint blocks covering [0, n). Exceptions
/// thrown by any block are rethrown (the one from the lowest block first).
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace mal
