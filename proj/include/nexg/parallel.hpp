#pragma once

#include <cstddef>
#include <functional>

namespace nexg {

/// Worker count: NEXG_THREADS if set and positive, else the number of logical cores.
int default_thread_count();

/// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
/// processed exactly once; callers write results into slot i so output order
/// never depends on scheduling. The first exception thrown is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, int threads = 0);

}  // namespace nexg
