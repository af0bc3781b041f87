#pragma once

#include <cstddef>
#include <functional>

namespace mdyn {

/// Runs body(i) for i in [0, n) on up to `threads` workers (0 = hardware concurrency).
/// Work is handed out by index, so results written per index do not depend on scheduling.
/// The first exception thrown by any body is rethrown after all workers stop.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

int resolve_threads(int requested);

}  // namespace mdyn
