#pragma once

#include <cstddef>
#include <functional>

namespace letomo {

/// Worker count from LETOMO_WORKERS, falling back to the hardware
/// concurrency. Always at least 1.
std::size_t worker_count();

/// Runs `body(i)` for i in [0, n). Each index is visited exactly once; the
/// caller writes results into per-index slots so output never depends on
/// scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace letomo
