#pragma once

#include <cstddef>
#include <functional>

namespace lpd {

// 0 means std::thread::hardware_concurrency() (at least 1).
std::size_t resolve_threads(std::size_t requested);

// Calls fn(i) for every i in [0, count) on up to `threads` workers. Indices
// are handed out dynamically; callers write results into slot i so the
// outcome does not depend on scheduling. The first exception is rethrown.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace lpd
