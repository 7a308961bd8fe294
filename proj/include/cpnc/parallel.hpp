#pragma once

#include <cstdint>
#include <functional>

namespace cpnc {

// Process-wide worker count for data-parallel loops; set from --threads.
int thread_count();
void set_thread_count(int n);

// Runs fn(begin, end) over contiguous chunks of [0, n). Callers must write
// only to per-index disjoint locations; reductions stay sequential at call
// sites, which keeps every result independent of the worker count.
void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& fn);

}  // namespace cpnc
