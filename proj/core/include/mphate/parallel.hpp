#pragma once

#include <cstddef>
#include <functional>

namespace mphate {

/// Worker-thread cap: `MPHATE_THREADS` when set to a positive integer,
/// otherwise the hardware concurrency (at least 1).
std::size_t max_threads();

/// Runs body(i) for i in [0, count). Each index must write only its own
/// outputs; results are then independent of the schedule.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace mphate
