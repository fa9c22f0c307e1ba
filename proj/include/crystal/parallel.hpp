#pragma once

// Static-partition worker pool for independent replicas. Work item i always
// writes slot i of its caller-owned output, so results do not depend on the
// thread count.

#include <cstddef>
#include <functional>

namespace crystal {

/// Thread count from CRYSTAL_DRIFT_THREADS, else hardware concurrency.
std::size_t default_threads();
void set_default_threads(std::size_t threads);

/// Runs body(i) for i in [0, count) on up to `threads` workers (0 means
/// default_threads()). The first exception thrown by a worker is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, std::size_t threads = 0);

}  // namespace crystal
