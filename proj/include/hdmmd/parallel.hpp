#pragma once

#include <cstddef>
#include <functional>

namespace hdmmd {

// Worker count: hardware concurrency, capped by HD_MMD_THREADS when set.
int default_thread_count();

// Runs task(i) for i in [0, count) on up to `threads` workers. Indices are
// claimed dynamically, so callers must write results into per-index slots and
// reduce them afterwards in index order to stay independent of scheduling.
// The first exception thrown by a task is rethrown after all workers join.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task);

}  // namespace hdmmd
