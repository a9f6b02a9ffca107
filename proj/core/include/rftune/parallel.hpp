#pragma once

#include <cstddef>
#include <functional>

namespace rftune {

/// Worker count from the RF_TUNE_WORKERS environment variable, else `fallback`.
int workers_from_env(int fallback = 1);

/// Calls body(i) for i in [0, n) on up to `workers` threads. The first exception
/// thrown by any call is rethrown after all threads have joined.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body);

}  // namespace rftune
