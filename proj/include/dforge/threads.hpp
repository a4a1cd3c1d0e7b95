#pragma once

#include <cstddef>
#include <functional>

namespace dforge {

// Worker budget: DFORGE_THREADS when set (clamped to >= 1), otherwise the
// hardware concurrency.
int thread_budget();

// Runs fn over [0, n) split into contiguous chunks, one thread per chunk.
// Callers must only perform independent writes; results must not depend on
// the partition.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace dforge
