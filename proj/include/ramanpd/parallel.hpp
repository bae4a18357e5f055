#pragma once

#include <cstddef>
#include <functional>

namespace rpd {

/// Runs fn(i) for i in [0, n) on up to `jobs` threads (0 = hardware concurrency).
/// The first exception thrown (lowest index) is rethrown after all workers join.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

}  // namespace rpd
