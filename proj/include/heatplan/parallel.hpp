#pragma once

#include <cstddef>
#include <functional>

namespace heatplan {

// std::thread::hardware_concurrency(), at least 1.
int hardware_threads();

// Calls fn(i) for i in [0, n) on up to `threads` workers. Results must be written by index;
// the call order is unspecified. The exception from the lowest failing index is rethrown.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace heatplan
