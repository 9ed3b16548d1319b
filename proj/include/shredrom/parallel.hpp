#pragma once

#include <cstddef>
#include <functional>

namespace shredrom {

/// Worker cap: SHREDROM_THREADS when set to a positive integer, otherwise the
/// hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for every i in [0, n). Work is split statically; callers write
/// results into slot i so output order never depends on scheduling. The first
/// exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t max_workers = 0);

}  // namespace shredrom
