#pragma once

#include <cstddef>
#include <functional>

namespace maglab {

/// Thread count after the MAGLAB_THREADS override; always >= 1.
int resolve_thread_count(int requested);

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index writes
/// its own slot, so results do not depend on scheduling. If several calls
/// throw, the exception of the lowest index is rethrown.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

} // namespace maglab
