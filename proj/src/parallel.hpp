#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace qrisk {

/// Bounds worker threads used by batch loops (verification windows,
/// experiment slots). 0 restores the default of one worker per logical core.
void set_max_jobs(uint32_t jobs);
uint32_t max_jobs();

/// Runs body(i) for every i in [0, n), spreading iterations over up to
/// max_jobs() threads. The first exception thrown by any iteration is
/// rethrown on the calling thread once all workers have joined. Bodies must
/// write results only into their own index-i slot so that output is
/// identical at every thread count.
void parallel_for(size_t n, const std::function<void(size_t)>& body);

} // namespace qrisk
