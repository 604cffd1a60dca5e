#pragma once

#include <functional>

namespace spatent {

// Explicit request if positive, else SPATENT_WORKERS, else hardware concurrency.
int worker_count(int requested = 0);

// Runs body(i) for i in [0, count) on up to `workers` threads. The first
// exception thrown by any task is rethrown after all threads join.
void parallel_for(int count, int workers, const std::function<void(int)>& body);

}  // namespace spatent
