#pragma once

#include <cstddef>
#include <functional>

namespace shrinkforge {

/// Runs body(i) for i in [0, count) on up to `jobs` threads. Each index must
/// write only its own output slot; results are then independent of `jobs`.
/// The exception thrown by the lowest failing index is rethrown.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& body);

}  // namespace shrinkforge
