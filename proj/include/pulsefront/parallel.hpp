#pragma once

#include <cstddef>
#include <functional>

namespace pulsefront {

/// Caps the number of worker threads used inside module operations (>= 1).
void set_thread_count(int n);
int thread_count();

/// Splits [0, n) into contiguous chunks and runs fn(begin, end) on each, one chunk per worker.
/// Chunk boundaries depend only on n and the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace pulsefront
