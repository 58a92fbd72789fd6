#pragma once

#include <cstddef>
#include <functional>

namespace lgq {

// Worker-thread cap: LGQ_THREADS if set (must parse as a positive integer,
// otherwise throws), else the hardware concurrency, at least 1.
int worker_budget();

// Runs fn(0..n-1) across up to worker_budget() threads (strided partition).
// Callers must write to disjoint locations; completion order is unspecified
// but the partition is deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace lgq
