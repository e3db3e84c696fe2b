#pragma once

#include <cstddef>
#include <functional>

namespace tsr {

// Process-wide worker count for parallel_for. 0 = all hardware cores.
void set_thread_count(int n);
int thread_count();

// Runs fn(i) for i in [0, n). Work items must be independent; results are
// written by index so the outcome does not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace tsr
