#pragma once

#include <functional>

namespace fredholm {

/// Worker count used when a call passes threads <= 0. Initialized from
/// FREDHOLM_LAB_THREADS, else the hardware concurrency.
int default_threads();
void set_default_threads(int threads);

/// Runs body(i) for i in [begin, end) on up to `threads` workers. The first
/// exception thrown by any task is rethrown on the calling thread.
void parallel_for(int begin, int end, const std::function<void(int)>& body, int threads = 0);

}  // namespace fredholm
