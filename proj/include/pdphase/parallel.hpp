#pragma once

#include <cstddef>
#include <functional>

namespace pdphase {

/// Worker cap: PD_PHASELAB_THREADS if set and positive, else hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Callers are
/// expected to write results into per-index slots and reduce in index order,
/// so the outcome never depends on scheduling. The first exception thrown by
/// any body is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace pdphase
