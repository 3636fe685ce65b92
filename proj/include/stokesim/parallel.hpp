#pragma once

#include <functional>

namespace stokesim {

/// Runs fn(i) for i in [begin, end) on up to `jobs` threads. Work items must
/// write to disjoint locations; results are then independent of the thread
/// count, which keeps sweep output deterministic. jobs <= 1 runs inline.
void parallel_for(int begin, int end, int jobs, const std::function<void(int)>& fn);

}  // namespace stokesim
