#pragma once

#include <functional>

namespace turs {

/// Worker count: `requested` if positive, else the TURS_THREADS environment
/// variable, else hardware concurrency.
int thread_count(int requested);

/// Runs fn(i) for i in [0, n) on up to n_threads workers with a static chunk
/// partition. Results must be written by index; the partition is
/// deterministic, so outputs are independent of the worker count.
void parallel_for(int n, int n_threads, const std::function<void(int)>& fn);

}  // namespace turs
