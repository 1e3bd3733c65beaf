#pragma once

#include <cstddef>
#include <functional>

namespace rh {

// Worker count used by library-internal parallel loops (>= 1). Results never
// depend on it: every work item is computed independently.
void set_thread_count(std::size_t n);
std::size_t thread_count();

// Calls f(i) for i in [0, n), items handed out dynamically to the workers.
// After all workers join, the exception of the lowest failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

}  // namespace rh
