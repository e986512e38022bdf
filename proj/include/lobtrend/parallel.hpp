#pragma once

#include <cstddef>
#include <functional>

namespace lobtrend {

/// Worker count from LOBTREND_WORKERS, else hardware concurrency (at least 1).
std::size_t default_workers();

/// Runs fn(i) for i in [0, n) on up to `workers` threads (0 = default).
/// Items are claimed in index order; the first exception is rethrown after
/// all threads join.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace lobtrend
