#pragma once

#include <cstddef>
#include <functional>

namespace detcond {

/// Worker count: DETCOND_THREADS if set and positive, else the hardware count.
int thread_count();

/// Runs task(i) for i in [0, n) on up to thread_count() workers. Tasks are
/// claimed in index order; results must be stored by index by the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& task);

}  // namespace detcond
