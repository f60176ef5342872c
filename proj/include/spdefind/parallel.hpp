#pragma once

#include <cstddef>
#include <functional>

namespace spdefind {

// Worker count: hardware concurrency, capped by SPDEFIND_THREADS when set.
std::size_t worker_count();

// Runs body(i) for i in [0, n). Each index is visited by exactly one worker,
// so any per-index output is independent of the number of workers.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace spdefind
