#pragma once

#include <cstddef>
#include <functional>

namespace dgparam {

/// Worker count from DGPARAM_THREADS (0 or unset means hardware concurrency).
std::size_t thread_count();

/// Runs body(i) for i in [0, n), spread over up to thread_count() threads.
/// The first exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace dgparam
