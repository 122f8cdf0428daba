#pragma once

#include <cstddef>
#include <functional>

namespace escape {

// Worker count: ESCAPE_THREADS if set to a positive integer, otherwise the
// hardware concurrency.
unsigned thread_count();

// Runs body(i) for i in [0, n). Each index is processed exactly once and
// writes only its own output slot, so results do not depend on scheduling.
// The first exception thrown by any body is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace escape
