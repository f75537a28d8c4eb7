#pragma once

#include <cstddef>
#include <functional>

namespace drd {

/// Worker thread cap. Read once from DRD_THREADS (default: hardware
/// concurrency); 1 is the fully sequential reference mode.
int thread_count();

/// Overrides the cap for the rest of the process (tests use this).
void set_thread_count(int n);

/// Runs body(i) for i in [0, n). Work is split into contiguous ranges; the
/// body must write only to index-private state so the result does not depend
/// on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace drd
