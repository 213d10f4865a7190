#pragma once

#include <cstddef>
#include <functional>

namespace tf {

// 0 selects std::thread::hardware_concurrency().
void set_thread_count(int n);
int thread_count();

// Runs fn(i) for i in [0, n). Iterations are split into contiguous blocks,
// one per worker, so results written by index are deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace tf
