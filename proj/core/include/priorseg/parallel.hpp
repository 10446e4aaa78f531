#pragma once

#include <cstddef>
#include <functional>

namespace priorseg {

// PRIORSEG_THREADS when set and valid, hardware concurrency otherwise, >= 1.
int default_thread_count();

// Runs fn(0..count-1) over a fixed-size worker pool. Items must be
// independent; the first exception is rethrown after all workers join.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace priorseg
