#pragma once

#include <cstddef>
#include <functional>

namespace gradedgeo {

/// Worker count: GRADEDGEO_THREADS when set (>= 1), else hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, n). Bodies must write only to slot i of their
/// outputs; results are then independent of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace gradedgeo
