#pragma once

#include <cstdint>
#include <functional>

namespace demand {

// Worker-count knob set by the CLI (0 = hardware concurrency). Results are
// required to be identical for any setting: tasks write to preassigned
// slots and reductions happen in task order on the calling thread.
void set_default_threads(int n);
int default_threads();

// Runs fn(i) for i in [0, n). Static block partition over the requested
// thread count; exceptions are rethrown on the calling thread.
void parallel_for(int64_t n, const std::function<void(int64_t)>& fn, int threads = 0);

}  // namespace demand
