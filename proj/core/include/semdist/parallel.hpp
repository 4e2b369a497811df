#pragma once

#include <cstddef>
#include <functional>

namespace semdist {

// Runs body(i) for i in [0, n) on up to `threads` workers with static
// contiguous chunks. threads == 0 means std::thread::hardware_concurrency().
// The first exception thrown by any worker is rethrown after all join; when
// several indices fail, the one with the lowest index wins, so error
// reporting is independent of scheduling.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

unsigned resolve_threads(unsigned requested);

}  // namespace semdist
