#pragma once

#include <cstddef>
#include <functional>

namespace rotokin {

// Worker count: hardware concurrency, capped by the ROTOKIN_THREADS
// environment variable when set (minimum 1).
unsigned worker_count();

// Calls fn(i) for i in [0, n), spread over worker_count() threads. Each index
// runs exactly once; callers write results to index-addressed slots so the
// outcome does not depend on scheduling. The first exception thrown by fn is
// rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace rotokin
