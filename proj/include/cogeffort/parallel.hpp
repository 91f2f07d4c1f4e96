#pragma once

#include <cstddef>
#include <functional>

namespace cogeffort {

/// Runs body(i) for i in [0, n) on up to `jobs` threads (jobs <= 1 runs
/// inline). Work is split into contiguous static chunks, so results written
/// per index do not depend on scheduling. The first exception thrown by any
/// body is rethrown after all threads join.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body);

}  // namespace cogeffort
