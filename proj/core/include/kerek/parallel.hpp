#pragma once

#include <cstddef>
#include <functional>

namespace kerek {

// Worker cap: KEREK_THREADS if set (clamped to [1, 256]), else the hardware
// concurrency.  Parallel regions must be written so the result does not
// depend on the chunking: per-index writes or exact reductions only.
int thread_count();

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& chunk);

}  // namespace kerek
